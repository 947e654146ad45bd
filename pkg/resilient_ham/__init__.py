"""resilient-ham package."""

PACKAGE_NAME = "resilient-ham"
__version__ = "0.1.0"

__all__ = ["PACKAGE_NAME", "__version__"]
