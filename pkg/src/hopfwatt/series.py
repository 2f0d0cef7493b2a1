"""Truncated multivariate power series with dense coefficient storage.

A series in ``nvars`` variables truncated at total degree ``degree`` keeps its
coefficients in an array of shape ``(degree + 1,) * nvars``; entries whose
multi-index exceeds the total degree are held at zero.  The class takes part in
numpy's ufunc protocol, so a function written with ``np.sin``/``np.cos``/... can
be evaluated on series arguments and yields its Taylor expansion.
"""

from __future__ import annotations

import math
from functools import lru_cache
from numbers import Number

import numpy as np
from scipy import signal


@lru_cache(maxsize=None)
def degree_mask(nvars: int, degree: int) -> np.ndarray:
    grids = np.indices((degree + 1,) * nvars)
    return grids.sum(axis=0) <= degree


@lru_cache(maxsize=None)
def total_degree(nvars: int, degree: int) -> np.ndarray:
    return np.indices((degree + 1,) * nvars).sum(axis=0)


class TruncatedSeries:
    """Scalar power series about the origin, truncated at a total degree."""

    __array_priority__ = 100

    def __init__(self, coeffs, degree: int):
        coeffs = np.asarray(coeffs)
        if coeffs.dtype.kind not in "fc":
            coeffs = coeffs.astype(float)
        self.degree = int(degree)
        self.nvars = coeffs.ndim
        if coeffs.shape != (self.degree + 1,) * self.nvars:
            raise ValueError(f"coefficient array of shape {coeffs.shape} does not match degree {degree}")
        self.coeffs = np.where(degree_mask(self.nvars, self.degree), coeffs, 0)

    # construction -----------------------------------------------------

    @classmethod
    def zeros(cls, nvars, degree, dtype=float):
        return cls(np.zeros((degree + 1,) * nvars, dtype=dtype), degree)

    @classmethod
    def constant(cls, value, nvars, degree):
        out = cls.zeros(nvars, degree, dtype=np.result_type(value, float))
        out.coeffs[(0,) * nvars] = value
        return out

    @classmethod
    def variable(cls, index, nvars, degree, value=0.0):
        """The series ``value + t_index``."""
        out = cls.constant(value, nvars, degree)
        if degree >= 1:
            idx = [0] * nvars
            idx[index] = 1
            out.coeffs[tuple(idx)] = 1.0
        return out

    def copy(self):
        return TruncatedSeries(self.coeffs.copy(), self.degree)

    # access -------------------------------------------------------------

    def __getitem__(self, index):
        index = tuple(index)
        if sum(index) > self.degree:
            return 0.0
        return self.coeffs[index]

    @property
    def const(self):
        return self.coeffs[(0,) * self.nvars]

    def homogeneous(self, d):
        """Coefficients of total degree ``d`` as a masked copy."""
        return np.where(total_degree(self.nvars, self.degree) == d, self.coeffs, 0)

    def conj(self):
        return TruncatedSeries(np.conj(self.coeffs), self.degree)

    def diff(self, var: int):
        """Partial derivative in variable ``var`` (degree drops the top layer)."""
        c = np.moveaxis(self.coeffs, var, 0)
        out = np.zeros_like(c)
        k = np.arange(1, self.degree + 1).reshape((-1,) + (1,) * (self.nvars - 1))
        out[:-1] = c[1:] * k
        return TruncatedSeries(np.moveaxis(out, 0, var), self.degree)

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            if other.nvars != self.nvars or other.degree != self.degree:
                raise ValueError("series with different shapes cannot be combined")
            return other
        if isinstance(other, (Number, np.number)) or np.ndim(other) == 0:
            return TruncatedSeries.constant(other, self.nvars, self.degree)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(self.coeffs + other.coeffs, self.degree)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(self.coeffs - other.coeffs, self.degree)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return TruncatedSeries(-self.coeffs, self.degree)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries) and np.ndim(other) == 0:
            return TruncatedSeries(self.coeffs * other, self.degree)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        full = signal.convolve(self.coeffs, other.coeffs, method="direct")
        cut = full[(slice(0, self.degree + 1),) * self.nvars]
        return TruncatedSeries(cut, self.degree)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.reciprocal()
        return TruncatedSeries(self.coeffs / other, self.degree)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)) and exponent >= 0:
            result = TruncatedSeries.constant(1.0, self.nvars, self.degree)
            base = self
            e = int(exponent)
            while e:
                if e & 1:
                    result = result * base
                e >>= 1
                if e:
                    base = base * base
            return result
        a = self.const
        if a == 0:
            raise ValueError("non-integer power of a series with zero constant term")
        p = float(exponent)
        derivs = [a**p]
        coef = 1.0
        for k in range(1, self.degree + 1):
            coef *= p - k + 1
            derivs.append(coef * a ** (p - k))
        return self._apply(derivs)

    def reciprocal(self):
        return self**-1

    # elementary functions ------------------------------------------------

    def _apply(self, derivs):
        """Compose a scalar function, given its derivatives at the constant term."""
        u = self - self.const
        out = TruncatedSeries.constant(derivs[0], self.nvars, self.degree)
        power = TruncatedSeries.constant(1.0, self.nvars, self.degree)
        for k in range(1, self.degree + 1):
            power = power * u
            out = out + power * (derivs[k] / math.factorial(k))
        return out

    def sin(self):
        a = self.const
        cyc = [np.sin(a), np.cos(a), -np.sin(a), -np.cos(a)]
        return self._apply([cyc[k % 4] for k in range(self.degree + 1)])

    def cos(self):
        a = self.const
        cyc = [np.cos(a), -np.sin(a), -np.cos(a), np.sin(a)]
        return self._apply([cyc[k % 4] for k in range(self.degree + 1)])

    def exp(self):
        return self._apply([np.exp(self.const)] * (self.degree + 1))

    def log(self):
        a = self.const
        derivs = [np.log(a)] + [(-1) ** (k + 1) * math.factorial(k - 1) / a**k for k in range(1, self.degree + 1)]
        return self._apply(derivs)

    def sqrt(self):
        return self**0.5

    _UFUNCS = {
        np.add: lambda a, b: a + b,
        np.subtract: lambda a, b: a - b,
        np.multiply: lambda a, b: a * b,
        np.true_divide: lambda a, b: a / b,
        np.power: lambda a, b: a**b,
        np.negative: lambda a: -a,
        np.positive: lambda a: a,
        np.square: lambda a: a * a,
        np.sin: lambda a: a.sin(),
        np.cos: lambda a: a.cos(),
        np.exp: lambda a: a.exp(),
        np.log: lambda a: a.log(),
        np.sqrt: lambda a: a.sqrt(),
    }

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs or ufunc not in self._UFUNCS:
            return NotImplemented
        op = self._UFUNCS[ufunc]
        if ufunc.nin == 1:
            return op(inputs[0])
        a, b = inputs
        if not isinstance(a, TruncatedSeries):
            a = self._coerce(a)
            if a is NotImplemented:
                return NotImplemented
        return op(a, b)

    def __repr__(self):
        return f"TruncatedSeries(nvars={self.nvars}, degree={self.degree})"
