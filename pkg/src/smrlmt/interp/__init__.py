"""Executable relations: compilation, evaluation context and the Web-function library."""

from .compiler import CompiledRelation, ExecutionContext, compile_relation, referenced_input_types
from .library import WebLibrary, normalize_url
from .values import ActionRef, EvalError, ParamRef, ProviderError, values_equal

__all__ = [
    "ActionRef",
    "CompiledRelation",
    "EvalError",
    "ExecutionContext",
    "ParamRef",
    "ProviderError",
    "WebLibrary",
    "compile_relation",
    "normalize_url",
    "referenced_input_types",
    "values_equal",
]
