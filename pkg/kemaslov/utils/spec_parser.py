"""
Parser de cadenas constructoras del tipo `CPn(n=1)`, `latitude(0.5)` o
`reversed(cap(1))`.
"""

import ast
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

from kemaslov.utils.validators import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstructorCall:
    name: str
    args: Tuple[Any, ...] = ()
    kwargs: Dict[str, Any] = field(default_factory=dict)

    def __str__(self):
        parts = [repr(a) if not isinstance(a, ConstructorCall) else str(a) for a in self.args]
        parts += [f"{k}={v!r}" for k, v in sorted(self.kwargs.items())]
        return f"{self.name}({', '.join(parts)})"


def _literal(node: ast.AST, text: str, field_name: str) -> Any:
    if isinstance(node, ast.Call):
        return _call(node, text, field_name)
    if isinstance(node, ast.Name):
        # Identificadores sueltos (p.ej. lattice=square) se leen como cadenas
        return node.id
    try:
        return ast.literal_eval(node)
    except ValueError:
        raise ConfigError(f"Argumento no literal en '{text}'", field=field_name)


def _call(node: ast.Call, text: str, field_name: str) -> ConstructorCall:
    if not isinstance(node.func, ast.Name):
        raise ConfigError(f"Constructor inválido en '{text}'", field=field_name)
    args = tuple(_literal(a, text, field_name) for a in node.args)
    kwargs = {kw.arg: _literal(kw.value, text, field_name) for kw in node.keywords}
    return ConstructorCall(node.func.id, args, kwargs)


def parse_constructor(text: str, field_name: str = 'spec') -> ConstructorCall:
    """Convierte 'nombre(args)' o 'nombre' en un ConstructorCall"""
    if not isinstance(text, str) or not text.strip():
        raise ConfigError(f"{field_name} vacío o no textual: {text!r}", field=field_name)
    try:
        tree = ast.parse(text.strip(), mode='eval')
    except SyntaxError as e:
        raise ConfigError(f"Sintaxis inválida en {field_name}='{text}': {e.msg}", field=field_name)
    body = tree.body
    if isinstance(body, ast.Name):
        return ConstructorCall(body.id)
    if isinstance(body, ast.Call):
        return _call(body, text, field_name)
    raise ConfigError(f"{field_name}='{text}' no es una llamada a constructor", field=field_name)


def build_from_registry(call: ConstructorCall, registry: Dict[str, Any], field_name: str, *extra):
    """Busca el constructor en el registro y lo invoca; errores de firma → ConfigError"""
    factory = registry.get(call.name)
    if factory is None:
        raise ConfigError(
            f"Constructor '{call.name}' desconocido para {field_name}. "
            f"Válidos: {', '.join(sorted(registry))}",
            code='UNKNOWN_CONSTRUCTOR', field=field_name,
        )
    try:
        return factory(*extra, *call.args, **call.kwargs)
    except TypeError as e:
        raise ConfigError(f"Argumentos inválidos para {call}: {e}", field=field_name)
