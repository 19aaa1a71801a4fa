"""Operator families applied pointwise through jets.

CanonicalOp is the closed form

    D(f)(x) = sum_i c_i(x)·f^(i)(x) + sum_i d_i(x)·f(x)·ln|f(x)|^i,

with the second sum defined as 0 wherever f(x) = 0 (x·ln|x|^k extends
continuously by 0). BlackBoxOp wraps an arbitrary deterministic rule
(SmoothFn, x) -> real, so the identity checks can probe operators with no
structural access.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence, Union

from .errors import NumericRangeError, StructuralError
from .functions import SmoothFn, fn_constant
from .jets import Jet


class CanonicalOp:
    """Order-n operator with derivative coefficients c and log-term
    coefficients d (each a list of n SmoothFn)."""

    __slots__ = ("n", "c", "d", "descriptor", "_has_log_terms", "_coef_cache")

    def __init__(
        self,
        n: int,
        c: Sequence[SmoothFn],
        d: Sequence[SmoothFn],
        descriptor: str | None = None,
    ):
        if n < 1:
            raise StructuralError("operator order must be positive")
        if len(c) != n or len(d) != n:
            raise StructuralError(
                f"need exactly n={n} coefficient functions, got {len(c)} and {len(d)}"
            )
        self.n = n
        self.c = tuple(c)
        self.d = tuple(d)
        self._has_log_terms = not all(fn.is_zero for fn in self.d)
        self._coef_cache: dict = {}
        if descriptor is None:
            cs = ", ".join(fn.descriptor for fn in self.c)
            ds = ", ".join(fn.descriptor for fn in self.d)
            descriptor = f"D[n={n}; c=({cs}); d=({ds})]"
        self.descriptor = descriptor

    def coefficient_values(self, x: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """(c_1(x)..c_n(x)), (d_1(x)..d_n(x)), memoized per point."""
        cached = self._coef_cache.get(x)
        if cached is None:
            cached = (
                tuple(fn.value_at(x) for fn in self.c),
                tuple(fn.value_at(x) for fn in self.d),
            )
            if len(self._coef_cache) > 4096:
                self._coef_cache.clear()
            self._coef_cache[x] = cached
        return cached

    def __repr__(self) -> str:
        return self.descriptor


class BlackBoxOp:
    """Opaque deterministic mapping (SmoothFn, x) -> real."""

    __slots__ = ("fn", "descriptor")

    def __init__(self, fn: Callable[[SmoothFn, float], float], descriptor: str):
        self.fn = fn
        self.descriptor = descriptor

    def __repr__(self) -> str:
        return self.descriptor


Operator = Union[CanonicalOp, BlackBoxOp]


def apply_canonical_values(
    c_vals: Sequence[float], d_vals: Sequence[float], f: SmoothFn, x: float
) -> float:
    """Canonical formula with numeric coefficients (used by recovery)."""
    n = len(c_vals)
    jet = f.eval_jet(x, n)
    total = 0.0
    for i in range(n):
        total += c_vals[i] * jet.derivs[i + 1]
    v = jet.value
    if v != 0.0:
        log_v = math.log(abs(v))
        power = 1.0
        for i in range(n):
            power *= log_v
            total += d_vals[i] * v * power
    return total


def apply(op: Operator, f: SmoothFn, x: float) -> float:
    """Evaluate D(f)(x); the jet of f is taken at order n for canonical D."""
    if isinstance(op, BlackBoxOp):
        out = op.fn(f, x)
        if not math.isfinite(out):
            raise NumericRangeError(
                f"{op.descriptor} produced a non-finite value at x={x}"
            )
        return out
    jet: Jet = f.eval_jet(x, op.n)
    derivs = jet.derivs
    c_vals, d_vals = op.coefficient_values(x)
    total = 0.0
    for i in range(op.n):
        total += c_vals[i] * derivs[i + 1]
    v = derivs[0]
    if v != 0.0 and op._has_log_terms:
        log_v = math.log(abs(v))
        power = 1.0
        for dv in d_vals:
            power *= log_v
            total += dv * v * power
    if not math.isfinite(total):
        raise NumericRangeError(
            f"{op.descriptor} produced a non-finite value at x={x}"
        )
    return total


def is_linear_form(op: CanonicalOp) -> bool:
    """True iff every log-term coefficient is the zero function (form with
    derivative terms only, which is linear in f)."""
    if not isinstance(op, CanonicalOp):
        raise TypeError("is_linear_form applies to canonical operators")
    return all(fn.is_zero for fn in op.d)


def linear_op(c: Sequence[SmoothFn], descriptor: str | None = None) -> CanonicalOp:
    """Canonical operator with log terms all zero."""
    n = len(c)
    return CanonicalOp(n, c, [fn_constant(0.0)] * n, descriptor)


def derivative_op(k: int) -> Operator:
    """The k-th derivative as an operator; k=0 is the identity black box."""
    if k < 0:
        raise StructuralError("derivative order must be nonnegative")
    if k == 0:
        return BlackBoxOp(lambda f, x: f.value_at(x), "identity")
    coeffs = [fn_constant(0.0)] * (k - 1) + [fn_constant(1.0)]
    return linear_op(coeffs, descriptor=f"d^{k}/dx^{k}" if k > 1 else "d/dx")


def entropy_op() -> CanonicalOp:
    """First-order operator f ↦ f·ln|f| (the n=1 log-term solution)."""
    return CanonicalOp(
        1, [fn_constant(0.0)], [fn_constant(1.0)], descriptor="f*ln|f|"
    )


def builtin_blackbox(name: str, **params) -> BlackBoxOp:
    """Falsification black boxes shipped with the CLI.

    square: f ↦ f², fails every identity (not of canonical form).
    translate: f ↦ f(·+a), non-local; breaks localization.
    third-derivative: f ↦ f''', a bona fide order-3 operator.
    km-entropy: f ↦ f·ln|f| wrapped opaquely (0 at zeros of f).
    """
    if name == "square":
        return BlackBoxOp(lambda f, x: f.value_at(x) ** 2, "square: f -> f^2")
    if name == "translate":
        a = float(params.get("a", 0.5))
        return BlackBoxOp(
            lambda f, x: f.value_at(x + a), f"translate: f -> f(x+{a})"
        )
    if name == "third-derivative":
        return BlackBoxOp(lambda f, x: f.eval_jet(x, 3).derivs[3], "f -> f'''")
    if name == "km-entropy":
        def entropy(f: SmoothFn, x: float) -> float:
            v = f.value_at(x)
            return 0.0 if v == 0.0 else v * math.log(abs(v))

        return BlackBoxOp(entropy, "f -> f*ln|f|")
    raise StructuralError(f"unknown builtin black box {name!r}")
