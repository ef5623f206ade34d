""" Module implementing forward-mode automatic differentiation with dual numbers

    A Dual holds a value array of any shape and a tangent array with one extra
    trailing axis, one slot per seeded input direction. Seeding the decision
    vector with the identity yields the full gradient (or Jacobian) in one
    evaluation pass.

    The free functions below (sin, cos, ...) accept Duals as well as plain
    floats and ndarrays, so the same evaluation code computes values only or
    values plus derivatives depending on what it is fed.
"""

from typing import List, Sequence

import numpy as np

class NonFiniteError(ValueError):
    """ Raised when an evaluation produces NaN or infinity """

class Dual:
    """ Value and tangent array for forward-mode differentiation """

    # Keep numpy from broadcasting over Duals, ndarray <op> Dual ends up in the
    # reflected operators below.
    __array_ufunc__ = None
    __slots__ = ("val", "der")

    def __init__(self, val, der):
        self.val = np.asarray(val, dtype=float)
        self.der = np.asarray(der, dtype=float)

    @classmethod
    def variables(cls, x) -> "Dual":
        """ Seeds x with the identity so every entry is an independent variable """
        x = np.asarray(x, dtype=float)
        n = x.size
        return cls(x, np.eye(n).reshape(x.shape + (n,)))

    @property
    def shape(self):
        return self.val.shape

    @property
    def n_dirs(self) -> int:
        return self.der.shape[-1]

    def __repr__(self):
        return f"Dual(shape={self.val.shape}, dirs={self.n_dirs})"

    def __len__(self):
        return len(self.val)

    def _expand(self, shape) -> np.ndarray:
        return np.broadcast_to(self.der, tuple(shape) + (self.n_dirs,))

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        val = self.val + other
        return Dual(val, self._expand(val.shape))

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        val = self.val - other
        return Dual(val, self._expand(val.shape))

    def __rsub__(self, other):
        val = other - self.val
        return Dual(val, -self._expand(val.shape))

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.val[..., None] * other.der + other.val[..., None] * self.der)
        other = np.asarray(other, dtype=float)
        return Dual(self.val * other, self.der * other[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            val = self.val / other.val
            der = (self.der - val[..., None] * other.der) / other.val[..., None]
            return Dual(val, der)
        other = np.asarray(other, dtype=float)
        return Dual(self.val / other, self.der / other[..., None])

    def __rtruediv__(self, other):
        val = np.asarray(other, dtype=float) / self.val
        return Dual(val, -(val / self.val)[..., None] * self.der)

    def __pow__(self, power):
        power = float(power)
        return Dual(self.val ** power,
                    (power * self.val ** (power - 1.0))[..., None] * self.der)

    def __getitem__(self, idx):
        return Dual(self.val[idx], self.der[idx])

    def sum(self, axis=None) -> "Dual":
        if axis is None:
            return Dual(self.val.sum(), self.der.reshape(-1, self.n_dirs).sum(axis=0))
        axis = axis % self.val.ndim
        return Dual(self.val.sum(axis=axis), self.der.sum(axis=axis))

    def reshape(self, *shape) -> "Dual":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        val = self.val.reshape(shape)
        return Dual(val, self.der.reshape(val.shape + (self.n_dirs,)))

def value(x) -> np.ndarray:
    """ Strips the tangent part """
    if isinstance(x, Dual):
        return x.val
    return np.asarray(x, dtype=float)

def tangent(x, n_dirs: int) -> np.ndarray:
    """ Returns the tangent array, zeros for constants """
    if isinstance(x, Dual):
        return x.der
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape + (n_dirs,))

def _n_dirs(items) -> int:
    for item in items:
        if isinstance(item, Dual):
            return item.n_dirs
    return -1

def sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.val), np.cos(x.val)[..., None] * x.der)
    return np.sin(x)

def cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.val), -np.sin(x.val)[..., None] * x.der)
    return np.cos(x)

def tanh(x):
    if isinstance(x, Dual):
        t = np.tanh(x.val)
        return Dual(t, (1.0 - t * t)[..., None] * x.der)
    return np.tanh(x)

def sqrt(x):
    if isinstance(x, Dual):
        root = np.sqrt(x.val)
        return Dual(root, (0.5 / root)[..., None] * x.der)
    return np.sqrt(x)

def arctan2(y, x):
    """ Elementwise atan2(y, x), differentiable away from the origin """
    n = _n_dirs((y, x))
    if n < 0:
        return np.arctan2(y, x)
    yv, xv = value(y), value(x)
    r2 = xv * xv + yv * yv
    der = (xv / r2)[..., None] * tangent(y, n) - (yv / r2)[..., None] * tangent(x, n)
    return Dual(np.arctan2(yv, xv), der)

def wrap_smooth(x):
    """ Wraps to (-pi, pi] through atan2, derivative 1 away from the cut """
    return arctan2(sin(x), cos(x))

def cumsum(x, axis: int = 0):
    if isinstance(x, Dual):
        axis = axis % x.val.ndim
        return Dual(np.cumsum(x.val, axis=axis), np.cumsum(x.der, axis=axis))
    return np.cumsum(x, axis=axis)

def concatenate(parts: Sequence, axis: int = 0):
    """ np.concatenate for any mix of Duals and constants """
    n = _n_dirs(parts)
    if n < 0:
        return np.concatenate([np.asarray(p, dtype=float) for p in parts], axis=axis)
    vals = [value(p) for p in parts]
    axis = axis % vals[0].ndim
    return Dual(np.concatenate(vals, axis=axis),
                np.concatenate([tangent(p, n) for p in parts], axis=axis))

def stack(parts: List, axis: int = 0):
    """ np.stack for any mix of Duals and constants """
    n = _n_dirs(parts)
    if n < 0:
        return np.stack([np.asarray(p, dtype=float) for p in parts], axis=axis)
    vals = [value(p) for p in parts]
    axis = axis % (vals[0].ndim + 1)
    return Dual(np.stack(vals, axis=axis),
                np.stack([tangent(p, n) for p in parts], axis=axis))

def check_finite(x, what: str) -> None:
    """ Raises NonFiniteError naming the first offending entry.

        Args:
            - x: Dual or array to check
            - what (str): Name used in the message, e.g. "constraint"

        Raises:
            NonFiniteError: If a value or a tangent entry is NaN or infinite
    """
    vals = value(x)
    if not np.all(np.isfinite(vals)):
        idx = int(np.flatnonzero(~np.isfinite(vals.reshape(-1)))[0])
        raise NonFiniteError(f"non-finite {what} value at index {idx}")
    if isinstance(x, Dual) and not np.all(np.isfinite(x.der)):
        bad = np.argwhere(~np.isfinite(x.der.reshape(-1, x.n_dirs)))[0]
        raise NonFiniteError(f"non-finite {what} derivative at row {int(bad[0])}, "
                             f"decision index {int(bad[1])}")
