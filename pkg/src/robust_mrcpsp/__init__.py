"""Two-stage robust multi-mode resource-constrained project scheduling."""

from .instance import Activity, Instance, Mode, make_instance, validate

__version__ = "0.1.0"
__all__ = ["Activity", "Instance", "Mode", "make_instance", "validate", "__version__"]
