import logging
from typing import Any, Dict

logger = logging.getLogger(__name__)


class BaseModel:
    """Clase base para descriptores geométricos inmutables.

    - `_descriptor_fields` lista los atributos que describen la instancia
      (se usan en reportes JSON y en __repr__).
    - Las subclases no deben mutar estado después de construirse; así las
      evaluaciones pueden correr en paralelo sin locks.
    """

    _descriptor_fields: tuple = ()
    kind: str = 'model'

    def to_dict(self) -> Dict[str, Any]:
        data = {'kind': self.kind, 'label': getattr(self, 'label', None)}
        for name in self._descriptor_fields:
            data[name] = getattr(self, name)
        return data

    def describe(self) -> str:
        return getattr(self, 'label', None) or self.kind

    def __repr__(self):
        fields = ', '.join(f"{name}={getattr(self, name)!r}" for name in self._descriptor_fields)
        return f"{type(self).__name__}({fields})"
