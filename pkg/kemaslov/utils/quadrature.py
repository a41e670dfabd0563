"""
Reglas de Gauss-Legendre compuestas, suma por pares determinista y
estimación de orden observado.
"""

import logging
import math
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos en [0, 1] (copias de solo lectura cacheadas)"""
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_rule(a: float, b: float, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Regla compuesta sobre [a, b] con `panels` celdas de `order` nodos cada una"""
    nodes, weights = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    x = (edges[:-1, None] + h[:, None] * nodes[None, :]).ravel()
    w = (h[:, None] * weights[None, :]).ravel()
    return x, w


def pairwise_sum(values: np.ndarray) -> float:
    """Suma en árbol de forma fija: el resultado depende solo del número de términos"""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    size = 1 << (v.size - 1).bit_length()
    if size != v.size:
        v = np.concatenate([v, np.zeros(size - v.size)])
    while v.size > 1:
        v = v[0::2] + v[1::2]
    return float(v[0])


def observed_orders(errors: Sequence[float], floor: float = 1e-13) -> list:
    """log2 de cocientes sucesivos; None cuando algún término está en el piso de redondeo"""
    orders = []
    for coarse, fine in zip(errors[:-1], errors[1:]):
        coarse, fine = abs(coarse), abs(fine)
        if coarse <= floor or fine <= floor:
            orders.append(None)
        else:
            orders.append(math.log2(coarse / fine))
    return orders

