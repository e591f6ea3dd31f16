"""Unit quaternions as numpy arrays ``(w, x, y, z)``.

Functions accept arrays whose last axis has length 4, so a whole traced
component can be pushed through the representation formulas at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        return cls(*(float(c) for c in a))

    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_array(qmul(self.array(), other.array()))

    def inverse(self) -> "Quaternion":
        return Quaternion.from_array(qinv(self.array()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.array()))

    def is_traceless(self, tol: float = 1e-9) -> bool:
        return abs(self.w) < tol


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(a, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def qinv(a: np.ndarray) -> np.ndarray:
    """Inverse of a unit quaternion (its conjugate)."""
    return np.asarray(a, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


def qexp(angle, axis) -> np.ndarray:
    """``exp(angle * Q)`` for a unit pure-imaginary ``Q`` given as a 3-vector."""
    angle = np.asarray(angle, dtype=float)
    axis = np.asarray(axis, dtype=float)
    c = np.cos(angle)[..., None]
    s = np.sin(angle)[..., None]
    return np.concatenate([c, s * axis], axis=-1)
