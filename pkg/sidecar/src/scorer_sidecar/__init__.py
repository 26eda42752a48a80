from .app import create_app
from .registry import MetricRegistry, ModelLoadError, build_registry

__version__ = "0.1.0"
__all__ = ["create_app", "MetricRegistry", "ModelLoadError", "build_registry"]
