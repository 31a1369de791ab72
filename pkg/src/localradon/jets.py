"""Truncated Taylor (jet) arithmetic in a single variable.

A jet stores Taylor coefficients ``c[n] = f^(n)(x0)/n!`` up to a fixed
truncation order.  Coefficients may be scalars or numpy arrays of any
common shape, so the same arithmetic drives both pointwise field
evaluation and grid-valued kernel construction.
"""

from __future__ import annotations

import math

import numpy as np


class Jet:
    """Truncated Taylor series about a base point.

    Parameters
    ----------
    coeffs : array_like
        Coefficient stack of shape ``(order + 1, *grid_shape)``.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim == 0:
            self.c = self.c[None]

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @classmethod
    def variable(cls, x0: float, order: int) -> "Jet":
        c = np.zeros(order + 1)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        return cls(c)

    def _coerce(self, other, order):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, order)

    def __add__(self, other):
        other = self._coerce(other, self.order)
        n = min(self.order, other.order)
        return Jet(self.c[: n + 1] + other.c[: n + 1])

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-self._coerce(other, self.order))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            if other.ndim == 0:
                return Jet(self.c * other)
            other = Jet.constant(other, self.order)
        n = min(self.order, other.order)
        a, b = self.c, other.c
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((n + 1,) + shape)
        for k in range(n + 1):
            for i in range(k + 1):
                out[k] += a[i] * b[k - i]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other, dtype=float))
        n = min(self.order, other.order)
        a, b = self.c, other.c
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((n + 1,) + shape)
        out[0] = a[0] / b[0]
        for k in range(1, n + 1):
            acc = a[k].astype(float, copy=True) * np.ones(shape)
            for i in range(1, k + 1):
                acc = acc - b[i] * out[k - i]
            out[k] = acc / b[0]
        return Jet(out)

    def __pow__(self, p: int):
        if p < 0:
            raise ValueError("only nonnegative integer powers")
        result = Jet.constant(np.ones(self.c.shape[1:]), self.order)
        base = self
        while p:
            if p & 1:
                result = result * base
            base = base * base
            p >>= 1
        return result

    def exp(self) -> "Jet":
        n = self.order
        f = self.c
        out = np.zeros_like(f)
        out[0] = np.exp(f[0])
        for k in range(1, n + 1):
            acc = np.zeros_like(out[0])
            for i in range(1, k + 1):
                acc = acc + i * f[i] * out[k - i]
            out[k] = acc / k
        return Jet(out)

    def sin_cos(self):
        n = self.order
        f = self.c
        s = np.zeros_like(f)
        c = np.zeros_like(f)
        s[0] = np.sin(f[0])
        c[0] = np.cos(f[0])
        for k in range(1, n + 1):
            sa = np.zeros_like(s[0])
            ca = np.zeros_like(c[0])
            for i in range(1, k + 1):
                sa = sa + i * f[i] * c[k - i]
                ca = ca - i * f[i] * s[k - i]
            s[k] = sa / k
            c[k] = ca / k
        return Jet(s), Jet(c)

    def sin(self) -> "Jet":
        return self.sin_cos()[0]

    def cos(self) -> "Jet":
        return self.sin_cos()[1]

    def deriv(self) -> "Jet":
        """Jet of the derivative; truncation order drops by one."""
        if self.order == 0:
            return Jet(np.zeros((1,) + self.c.shape[1:]))
        n = np.arange(1, self.order + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[1:] * n)

    def value(self):
        return self.c[0]

    def derivative(self, n: int):
        """n-th derivative at the base point."""
        if n > self.order:
            raise ValueError(f"jet order {self.order} < requested derivative {n}")
        return self.c[n] * math.factorial(n)

    def eval(self, dx):
        """Evaluate the truncated series at displacement ``dx`` from the base."""
        dx = np.asarray(dx, dtype=float)
        out = np.zeros(np.broadcast_shapes(dx.shape, self.c.shape[1:]))
        for ck in self.c[::-1]:
            out = out * dx + ck
        return out
