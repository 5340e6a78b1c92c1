"""Tensor values carried through a differentiation graph."""

from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

Array = NDArray[np.float64]


class DiffValue:
    """
    A float64 array plus its adjoint.

    The adjoint is allocated on first access and always has the shape of
    ``data``; evaluation graphs never touch it.
    """

    __slots__ = ("data", "name", "_adjoint")

    def __init__(self, data: ArrayLike, name: Optional[str] = None):
        self.data: Array = np.array(data, dtype=np.float64)
        self.name = name
        self._adjoint: Optional[Array] = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def adjoint(self) -> Array:
        if self._adjoint is None:
            self._adjoint = np.zeros_like(self.data)
        return self._adjoint

    @adjoint.setter
    def adjoint(self, value: ArrayLike) -> None:
        value = np.asarray(value, dtype=np.float64)
        if value.shape != self.data.shape:
            raise ValueError(f"adjoint shape {value.shape} != data shape {self.data.shape}")
        self._adjoint = value.copy()

    def accumulate(self, grad: Array) -> None:
        """Add ``grad`` into the adjoint."""
        if self._adjoint is None:
            self._adjoint = np.array(grad, dtype=np.float64, copy=True)
        else:
            self._adjoint += grad

    def zero_adjoint(self) -> None:
        self._adjoint = None

    def has_adjoint(self) -> bool:
        return self._adjoint is not None

    def __repr__(self) -> str:
        label = f"{self.name!r}, " if self.name else ""
        return f"DiffValue({label}shape={self.shape})"
