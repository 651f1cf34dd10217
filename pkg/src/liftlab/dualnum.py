"""Forward-mode dual numbers and dual-safe linear algebra.

A :class:`Dual` holds a value `re` and a tangent `im`.  Both slots are
generic: `re` may itself be a Dual (nesting yields exact second and higher
derivatives) and `im` may be a numpy vector (one evaluation then carries a
whole gradient, which is how the flow integrator obtains its Jacobian).

Convention used throughout the package:

* first derivative of ``f`` at ``x``:  seed ``Dual(x, 1.0)``, read ``.im``
* mixed second derivative d2f/dxi dxj: seed
  ``Dual(Dual(x_k, di_k), Dual(dj_k, 0.0))`` and read ``.im.im``
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, SingularMatrixError

Number = "float | Dual"


class Dual:
    __slots__ = ("re", "im")

    def __init__(self, re, im=0.0):
        self.re = re
        self.im = im

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re + other.re, self.im + other.im)
        return Dual(self.re + other, self.im)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re - other.re, self.im - other.im)
        return Dual(self.re - other, self.im)

    def __rsub__(self, other):
        return Dual(other - self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re * other.re, self.re * other.im + self.im * other.re)
        return Dual(self.re * other, self.im * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if value(other) == 0.0:
                raise DomainError("division by zero")
            inv = 1.0 / other.re if not isinstance(other.re, Dual) else _recip(other.re)
            q = self.re * inv
            return Dual(q, (self.im - q * other.im) * inv)
        if value(other) == 0.0:
            raise DomainError("division by zero")
        return Dual(self.re / other, self.im / other)

    def __rtruediv__(self, other):
        return Dual(other, 0.0 * self.im) / self

    def __neg__(self):
        return Dual(-self.re, -self.im)

    def __pow__(self, p):
        if isinstance(p, Dual):
            return exp(p * log(self))
        if p == 0:
            return Dual(1.0, 0.0 * self.im)
        if p == 1:
            return self
        base = _pow_scalar(self.re, p)
        slope = _pow_scalar(self.re, p - 1) * p
        return Dual(base, slope * self.im)

    def __rpow__(self, base):
        if value_of_scalar(base) <= 0.0:
            raise DomainError(f"cannot raise nonpositive base {base!r} to a varying power")
        return exp(self * math.log(base))

    def __repr__(self):
        return f"Dual({self.re!r}, {self.im!r})"


def _recip(x):
    return Dual(1.0, 0.0) / x if isinstance(x, Dual) else 1.0 / x


def value_of_scalar(x) -> float:
    return x.re if not isinstance(x, Dual) else value(x)


def value(x) -> float:
    """Real (deepest) part of a possibly nested dual."""
    while isinstance(x, Dual):
        x = x.re
    return float(x)


def _pow_scalar(base, p):
    """base ** p with the package's domain rules; base may be a Dual."""
    if isinstance(base, Dual):
        return base ** p
    if base < 0.0 and not float(p).is_integer():
        raise DomainError(f"fractional power of negative base {base!r}")
    if base == 0.0 and p < 0:
        raise DomainError("zero raised to a negative power")
    return base ** p


# -- elementary functions (dispatch on Dual, chain rule) -------------------


def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.re), cos(x.re) * x.im)
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.re), -sin(x.re) * x.im)
    return math.cos(x)


def tan(x):
    if isinstance(x, Dual):
        c = cos(x.re)
        return Dual(tan(x.re), x.im / (c * c))
    c = math.cos(x)
    if c == 0.0:
        raise DomainError("tan at a pole")
    return math.tan(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.re)
        return Dual(e, e * x.im)
    return math.exp(x)


def log(x):
    if isinstance(x, Dual):
        if value(x) <= 0.0:
            raise DomainError("log of a nonpositive value")
        return Dual(log(x.re), x.im / x.re)
    if x <= 0.0:
        raise DomainError("log of a nonpositive value")
    return math.log(x)


def sinh(x):
    if isinstance(x, Dual):
        return Dual(sinh(x.re), cosh(x.re) * x.im)
    return math.sinh(x)


def cosh(x):
    if isinstance(x, Dual):
        return Dual(cosh(x.re), sinh(x.re) * x.im)
    return math.cosh(x)


def sqrt(x):
    if isinstance(x, Dual):
        if value(x) < 0.0:
            raise DomainError("sqrt of a negative value")
        return x ** 0.5
    if x < 0.0:
        raise DomainError("sqrt of a negative value")
    return math.sqrt(x)


def atan(x):
    if isinstance(x, Dual):
        return Dual(atan(x.re), x.im / (1.0 + x.re * x.re))
    return math.atan(x)


# -- dual-safe dense linear algebra (nested lists, tiny dimensions) --------


def zeros(rows: int, cols: int):
    return [[0.0] * cols for _ in range(rows)]


def mat_vec(A, v):
    return [sum(A[i][j] * v[j] for j in range(len(v))) for i in range(len(A))]


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [[sum(A[i][p] * B[p][j] for p in range(k)) for j in range(m)] for i in range(n)]


def transpose(A):
    return [list(row) for row in zip(*A)]


def mat_inv(A):
    """Gauss-Jordan inverse with partial pivoting on values; entries may be
    Dual.  Raises SingularMatrixError on a zero pivot."""
    n = len(A)
    M = [list(row) for row in A]
    inv = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    scale = max((abs(value(e)) for row in A for e in row), default=0.0)
    tiny = 1e-14 * max(scale, 1.0)
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: abs(value(M[r][col])))
        if abs(value(M[pivot_row][col])) < tiny:
            raise SingularMatrixError(f"singular {n}x{n} matrix (pivot column {col})")
        if pivot_row != col:
            M[col], M[pivot_row] = M[pivot_row], M[col]
            inv[col], inv[pivot_row] = inv[pivot_row], inv[col]
        pivot = M[col][col]
        M[col] = [e / pivot for e in M[col]]
        inv[col] = [e / pivot for e in inv[col]]
        for r in range(n):
            if r == col:
                continue
            f = M[r][col]
            if isinstance(f, Dual) or f != 0.0:
                M[r] = [M[r][j] - f * M[col][j] for j in range(n)]
                inv[r] = [inv[r][j] - f * inv[col][j] for j in range(n)]
    return inv


def to_float_array(A) -> np.ndarray:
    """Collapse a (possibly dual-valued) nested list to its real parts."""
    arr = np.asarray(A, dtype=object)
    return np.vectorize(value, otypes=[float])(arr)
