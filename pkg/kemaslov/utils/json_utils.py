"""
Utilidades para serialización JSON consistente de reportes.
La salida es estable byte a byte: claves ordenadas, indentación fija.
"""

import dataclasses
import enum
import json
import logging
import math
from typing import Any

import numpy as np

logger = logging.getLogger(__name__)


class JSONEncoder:
    """
    Codificador JSON con soporte para tipos numéricos de numpy,
    complejos, dataclasses y enums.
    """

    @staticmethod
    def serialize(obj: Any) -> Any:
        """
        Serializa un objeto para JSON, manejando tipos especiales.

        Args:
            obj: El objeto a serializar

        Returns:
            Una versión serializable del objeto
        """
        if obj is None:
            return None

        if isinstance(obj, (bool, np.bool_)):
            return bool(obj)

        if isinstance(obj, (int, np.integer)):
            return int(obj)

        if isinstance(obj, (float, np.floating)):
            value = float(obj)
            # JSON no admite NaN/Infinity
            if not math.isfinite(value):
                return str(value)
            return value

        if isinstance(obj, (complex, np.complexfloating)):
            return {'re': JSONEncoder.serialize(obj.real), 'im': JSONEncoder.serialize(obj.imag)}

        if isinstance(obj, str):
            return obj

        if isinstance(obj, enum.Enum):
            return JSONEncoder.serialize(obj.value)

        if isinstance(obj, np.ndarray):
            return [JSONEncoder.serialize(x) for x in obj.tolist()]

        if hasattr(obj, 'to_dict') and callable(obj.to_dict):
            return JSONEncoder.serialize(obj.to_dict())

        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return {f.name: JSONEncoder.serialize(getattr(obj, f.name)) for f in dataclasses.fields(obj)}

        if isinstance(obj, dict):
            return {str(k): JSONEncoder.serialize(v) for k, v in obj.items()}

        if isinstance(obj, (list, tuple, set, frozenset)):
            items = list(obj)
            if isinstance(obj, (set, frozenset)):
                items = sorted(items, key=repr)
            return [JSONEncoder.serialize(x) for x in items]

        logger.warning(f"Tipo no serializable {type(obj).__name__}; se usa str()")
        return str(obj)


def dumps(obj: Any) -> str:
    """JSON determinista con salto de línea final"""
    return json.dumps(JSONEncoder.serialize(obj), sort_keys=True, indent=2, ensure_ascii=False) + '\n'
