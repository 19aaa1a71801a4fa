"""Truncated Taylor-jet arithmetic at a point.

A jet stores the raw derivatives f(x0), f'(x0), ..., f^(K)(x0) of a real
function at a base point. Products follow the binomial convolution of the
higher-order product rule; exp, ln, reciprocal, sin/cos and powers are
computed by the standard triangular recurrences, so every coefficient is
exact up to floating-point rounding (no series truncation error enters
below order K).

Raw derivatives, not Taylor coefficients f^(i)/i!, are stored: the product
rule then reads off the binomial table verbatim.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .errors import EvalDomainError, NumericRangeError, StructuralError

DEFAULT_MAX_ORDER = 12

# Pascal rows, extended on demand; entries exact in doubles far beyond order 12.
_BINOM: list[tuple[float, ...]] = [(1.0,)]


def binomial_row(k: int) -> tuple[float, ...]:
    """Row k of Pascal's triangle as floats: C(k,0..k)."""
    while len(_BINOM) <= k:
        prev = _BINOM[-1]
        n = len(_BINOM)
        _BINOM.append(tuple(float(math.comb(n, j)) for j in range(n + 1)))
    return _BINOM[k]


def _check_finite(values: Sequence[float]) -> None:
    for v in values:
        if not math.isfinite(v):
            raise NumericRangeError(f"non-finite jet coefficient: {v!r}")


class Jet:
    """Derivatives (f(x0), f'(x0), ..., f^(K)(x0)) of a function at x0.

    Immutable value; all entries finite.
    """

    __slots__ = ("x0", "derivs")

    def __init__(self, x0: float, derivs: Iterable[float]):
        d = tuple(map(float, derivs))
        if not d:
            raise StructuralError("a jet needs at least the order-0 entry")
        if not math.isfinite(x0):
            raise StructuralError("jet base point must be finite")
        if not all(map(math.isfinite, d)):
            _check_finite(d)
        object.__setattr__(self, "x0", x0 if type(x0) is float else float(x0))
        object.__setattr__(self, "derivs", d)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @property
    def order(self) -> int:
        return len(self.derivs) - 1

    @property
    def value(self) -> float:
        return self.derivs[0]

    def truncate(self, order: int) -> "Jet":
        """First order+1 entries as a lower-order jet."""
        if order > self.order:
            raise StructuralError(f"cannot truncate order {self.order} to {order}")
        return Jet(self.x0, self.derivs[: order + 1])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Jet)
            and self.x0 == other.x0
            and self.derivs == other.derivs
        )

    def __hash__(self) -> int:
        return hash((self.x0, self.derivs))

    def __repr__(self) -> str:
        return f"Jet(x0={self.x0}, derivs={list(self.derivs)})"

    # Operator sugar for internal use; the module-level functions are the API.
    def __add__(self, other: "Jet") -> "Jet":
        return jet_linear_combine(1.0, self, 1.0, other)

    def __sub__(self, other: "Jet") -> "Jet":
        return jet_linear_combine(1.0, self, -1.0, other)

    def __neg__(self) -> "Jet":
        return Jet(self.x0, tuple(-v for v in self.derivs))

    def __mul__(self, other: "Jet") -> "Jet":
        return jet_product(self, other)


def jet_constant(x0: float, value: float, order: int) -> Jet:
    """Jet of the constant function `value` at x0."""
    return Jet(x0, (float(value),) + (0.0,) * order)


def jet_variable(x0: float, order: int) -> Jet:
    """Jet of the identity function x at x0."""
    if order == 0:
        return Jet(x0, (x0,))
    return Jet(x0, (float(x0), 1.0) + (0.0,) * (order - 1))


def _require_aligned(j1: Jet, j2: Jet) -> None:
    if j1.x0 != j2.x0:
        raise StructuralError(
            f"jet base points differ: {j1.x0} vs {j2.x0}"
        )
    if j1.order != j2.order:
        raise StructuralError(
            f"jet orders differ: {j1.order} vs {j2.order}"
        )


def jet_linear_combine(a: float, j1: Jet, b: float, j2: Jet) -> Jet:
    """Componentwise a*j1 + b*j2 for jets sharing base point and order."""
    _require_aligned(j1, j2)
    d1, d2 = j1.derivs, j2.derivs
    return Jet(j1.x0, tuple(a * d1[i] + b * d2[i] for i in range(len(d1))))


def _conv(a: Sequence[float], b: Sequence[float]) -> list[float]:
    """Binomial convolution: (a*b)[k] = sum_j C(k,j) a[j] b[k-j].

    Terms are grouped in (j, k-j) pairs so the result is bitwise identical
    under swapping a and b (commutativity of the product is exact).
    """
    n = len(a)
    binomial_row(n - 1)
    rows = _BINOM
    out = [0.0] * n
    for k in range(n):
        row = rows[k]
        s = 0.0
        j = 0
        while j < k - j:
            s += row[j] * (a[j] * b[k - j] + a[k - j] * b[j])
            j += 1
        if j == k - j:
            s += row[j] * (a[j] * b[j])
        out[k] = s
    return out


def jet_product(j1: Jet, j2: Jet) -> Jet:
    """Jet of the pointwise product, by the higher-order product rule."""
    _require_aligned(j1, j2)
    return Jet(j1.x0, _conv(j1.derivs, j2.derivs))


def jet_exp(j: Jet) -> Jet:
    """Jet of exp∘g from the jet of g.

    Uses the recurrence h = exp(g), h^(k+1) = sum_j C(k,j) g^(j+1) h^(k-j),
    which is the product rule applied to h' = g'·h.
    """
    g = j.derivs
    n = len(g)
    try:
        h0 = math.exp(g[0])
    except OverflowError:
        raise NumericRangeError(f"exp overflow at value {g[0]}") from None
    if not math.isfinite(h0):
        raise NumericRangeError(f"exp overflow at value {g[0]}")
    h = [0.0] * n
    h[0] = h0
    binomial_row(n - 1)
    rows = _BINOM
    for k in range(n - 1):
        row = rows[k]
        s = 0.0
        for i in range(k + 1):
            s += row[i] * g[i + 1] * h[k - i]
        h[k + 1] = s
    return Jet(j.x0, h)


def jet_ln_abs(j: Jet) -> Jet:
    """Jet of ln|f| from the jet of f; requires f(x0) != 0.

    Solves f·u' = f' order by order (u = ln|f|); all coefficients beyond the
    value are sign-independent because only ratios over f appear.
    """
    f = j.derivs
    if f[0] == 0.0:
        raise EvalDomainError("log singularity at base point")
    n = len(f)
    u = [0.0] * n
    u[0] = math.log(abs(f[0]))
    binomial_row(n - 1)
    rows = _BINOM
    inv_f0 = 1.0 / f[0]
    for k in range(n - 1):
        # f[0]*u[k+1] = f[k+1] - sum_{i=1..k} C(k,i) f[i] u[k+1-i]
        row = rows[k]
        s = f[k + 1]
        for i in range(1, k + 1):
            s -= row[i] * f[i] * u[k + 1 - i]
        u[k + 1] = s * inv_f0
    return Jet(j.x0, u)


def jet_reciprocal(j: Jet) -> Jet:
    """Jet of 1/f; requires f(x0) != 0."""
    f = j.derivs
    if f[0] == 0.0:
        raise EvalDomainError("division by zero at base point")
    n = len(f)
    w = [0.0] * n
    w[0] = 1.0 / f[0]
    binomial_row(n - 1)
    rows = _BINOM
    for k in range(1, n):
        row = rows[k]
        s = 0.0
        for i in range(1, k + 1):
            s += row[i] * f[i] * w[k - i]
        w[k] = -s * w[0]
    return Jet(j.x0, w)


def jet_sin_cos(j: Jet) -> tuple[Jet, Jet]:
    """Jets of sin∘g and cos∘g, advanced jointly via s' = g'·c, c' = -g'·s."""
    g = j.derivs
    n = len(g)
    s = [0.0] * n
    c = [0.0] * n
    s[0] = math.sin(g[0])
    c[0] = math.cos(g[0])
    binomial_row(n - 1)
    rows = _BINOM
    for k in range(n - 1):
        row = rows[k]
        acc_s = 0.0
        acc_c = 0.0
        for i in range(k + 1):
            gi = row[i] * g[i + 1]
            acc_s += gi * c[k - i]
            acc_c -= gi * s[k - i]
        s[k + 1] = acc_s
        c[k + 1] = acc_c
    return Jet(j.x0, s), Jet(j.x0, c)


def jet_abs(j: Jet) -> Jet:
    """Jet of |f|; away from zeros this is ±f. Kink at f(x0)=0 is an error
    unless the jet is order 0."""
    v = j.derivs[0]
    if v > 0.0:
        return j
    if v < 0.0:
        return -j
    if j.order == 0:
        return Jet(j.x0, (0.0,))
    raise EvalDomainError("abs is not differentiable at a zero of f")


def jet_power(j: Jet, exponent: float) -> Jet:
    """Jet of f^p for a constant exponent p.

    Integer p: exact repeated products (any sign of f; negative p needs
    f(x0) != 0). Non-integer p: exp(p·ln f), requires f(x0) > 0.
    """
    if float(exponent).is_integer():
        p = int(exponent)
        if p == 0:
            return jet_constant(j.x0, 1.0, j.order)
        base = j if p > 0 else jet_reciprocal(j)
        acc = base
        for _ in range(abs(p) - 1):
            acc = jet_product(acc, base)
        return acc
    if j.derivs[0] <= 0.0:
        raise EvalDomainError(
            "fractional power needs a positive value at the base point"
        )
    ln = jet_ln_abs(j)
    scaled = Jet(j.x0, tuple(exponent * v for v in ln.derivs))
    return jet_exp(scaled)
