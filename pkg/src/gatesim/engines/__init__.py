from .base import Backend, ExecutionError, Interpreter, ResourceError
from .encoded import EncodedEngine
from .exact import ExactEngine

__all__ = ["Backend", "EncodedEngine", "ExactEngine", "ExecutionError", "Interpreter",
           "ResourceError"]
