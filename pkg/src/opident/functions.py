"""Jet-evaluable functions on an open domain.

A SmoothFn bundles a deterministic jet evaluator with a human-readable
descriptor. Constructors cover everything the identity and recovery
machinery needs: pointwise products, linear combinations, exp-composites,
polynomials with a prescribed jet, compact-support bumps, and
expression-backed functions.

Evaluation is pure; each SmoothFn memoizes jets per (point, order), which
makes the subset-product sweeps of the identity engine cheap without giving
operators any structural access to their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from . import exprs
from .errors import EvalDomainError, StructuralError
from .jets import (
    Jet,
    _conv,
    jet_constant,
    jet_exp,
    jet_linear_combine,
    jet_product,
    jet_reciprocal,
)

_CACHE_CAP = 8192


@dataclass(frozen=True)
class Domain:
    """Union of disjoint open intervals (a, b)."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.intervals:
            raise StructuralError("a domain needs at least one interval")
        for a, b in self.intervals:
            if not a < b:
                raise StructuralError(f"empty interval ({a}, {b})")
        ordered = sorted(self.intervals)
        for (_, b1), (a2, _) in zip(ordered, ordered[1:]):
            if a2 < b1:
                raise StructuralError("domain intervals overlap")
        object.__setattr__(self, "intervals", tuple(ordered))

    def contains(self, x: float) -> bool:
        return any(a < x < b for a, b in self.intervals)

    def intersect(self, other: "Domain") -> "Domain":
        if other is self:
            return self
        pieces = []
        for a1, b1 in self.intervals:
            for a2, b2 in other.intervals:
                lo, hi = max(a1, a2), min(b1, b2)
                if lo < hi:
                    pieces.append((lo, hi))
        if not pieces:
            raise StructuralError("functions have no common domain")
        return Domain(tuple(pieces))

    def __str__(self) -> str:
        return " ∪ ".join(f"({a}, {b})" for a, b in self.intervals)


REAL_LINE = Domain(((-math.inf, math.inf),))


def common_domain(fs: Sequence["SmoothFn"]) -> Domain:
    dom = fs[0].domain
    if all(f.domain is dom for f in fs):
        return dom
    for f in fs[1:]:
        dom = dom.intersect(f.domain)
    return dom


class SmoothFn:
    """A function evaluable to a Jet of any order at interior points."""

    __slots__ = ("descriptor", "domain", "is_zero", "_jet_fn", "_cache")

    def __init__(
        self,
        descriptor: str,
        jet_fn: Callable[[float, int], Jet],
        domain: Domain = REAL_LINE,
        is_zero: bool = False,
    ):
        self.descriptor = descriptor
        self.domain = domain
        self.is_zero = is_zero
        self._jet_fn = jet_fn
        self._cache: dict[tuple[float, int], Jet] = {}

    def eval_jet(self, x0: float, order: int) -> Jet:
        key = (x0, order)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self.domain is not REAL_LINE and not self.domain.contains(x0):
            raise EvalDomainError(
                f"{x0} is not interior to the domain {self.domain} of {self.descriptor}"
            )
        jet = self._jet_fn(x0, order)
        if len(self._cache) >= _CACHE_CAP:
            self._cache.clear()
        self._cache[key] = jet
        return jet

    def value_at(self, x: float) -> float:
        return self.eval_jet(x, 0).value

    def __repr__(self) -> str:
        return f"SmoothFn({self.descriptor})"


def fn_constant(c: float, domain: Domain = REAL_LINE) -> SmoothFn:
    c = float(c)
    desc = exprs.format_number(c) if c >= 0 else "-" + exprs.format_number(-c)
    return SmoothFn(
        desc,
        lambda x0, order: jet_constant(x0, c, order),
        domain,
        is_zero=(c == 0.0),
    )


def fn_from_expr(source, domain: Domain = REAL_LINE) -> SmoothFn:
    """Function denoted by a DSL string or parsed AST."""
    tree = exprs.parse(source) if isinstance(source, str) else source
    is_zero = isinstance(tree, exprs.Const) and tree.value == 0.0
    return SmoothFn(
        exprs.to_text(tree),
        lambda x0, order: exprs.eval_jet(tree, x0, order),
        domain,
        is_zero=is_zero,
    )


def fn_from_jet(x0: float, v: Sequence[float], domain: Domain = REAL_LINE) -> SmoothFn:
    """The polynomial sum_l v[l]·(x-x0)^l/l!, whose jet at x0 is exactly v."""
    x0 = float(x0)
    coeffs = tuple(float(c) for c in v)

    def jet_fn(y: float, order: int) -> Jet:
        # p^(k)(y) = sum_{l>=k} v[l]·t^(l-k)/(l-k)!
        t = y - x0
        derivs = []
        for k in range(order + 1):
            acc = 0.0
            tp = 1.0
            fact = 1.0
            for l in range(k, len(coeffs)):
                if l > k:
                    tp *= t
                    fact *= l - k
                acc += coeffs[l] * tp / fact
            derivs.append(acc)
        return Jet(y, derivs)

    desc = f"jetpoly@{x0}{list(coeffs)}"
    return SmoothFn(desc, jet_fn, domain, is_zero=all(c == 0.0 for c in coeffs))


def fn_product(fs: Sequence[SmoothFn]) -> SmoothFn:
    """Pointwise product; jets by iterated binomial convolution."""
    factors = tuple(fs)
    if not factors:
        raise StructuralError("fn_product needs at least one factor")
    if len(factors) == 1:
        return factors[0]
    dom = common_domain(factors)

    def jet_fn(x0: float, order: int) -> Jet:
        # canonical fold order: the product jet is then bitwise identical
        # under any permutation of the factor list
        jets = [f.eval_jet(x0, order).derivs for f in factors]
        jets.sort()
        acc = jets[0]
        for d in jets[1:]:
            acc = _conv(acc, d)
        return Jet(x0, acc)

    desc = "*".join(f"({f.descriptor})" for f in factors)
    return SmoothFn(desc, jet_fn, dom, is_zero=any(f.is_zero for f in factors))


def fn_scale_add(a: float, f: SmoothFn, b: float, g: SmoothFn) -> SmoothFn:
    """a·f + b·g."""
    dom = f.domain.intersect(g.domain)

    def jet_fn(x0: float, order: int) -> Jet:
        return jet_linear_combine(a, f.eval_jet(x0, order), b, g.eval_jet(x0, order))

    zero = (a == 0.0 or f.is_zero) and (b == 0.0 or g.is_zero)
    desc = f"{a}*({f.descriptor})+{b}*({g.descriptor})"
    return SmoothFn(desc, jet_fn, dom, is_zero=zero)


def fn_sum(fs: Sequence[SmoothFn]) -> SmoothFn:
    """f1 + f2 + ... ; jets added componentwise."""
    terms = tuple(fs)
    if not terms:
        raise StructuralError("fn_sum needs at least one term")
    if len(terms) == 1:
        return terms[0]
    dom = common_domain(terms)

    def jet_fn(x0: float, order: int) -> Jet:
        jets = [f.eval_jet(x0, order) for f in terms]
        derivs = tuple(
            sum(j.derivs[k] for j in jets) for k in range(order + 1)
        )
        return Jet(x0, derivs)

    desc = "+".join(f"({f.descriptor})" for f in terms)
    return SmoothFn(desc, jet_fn, dom, is_zero=all(f.is_zero for f in terms))


def fn_exp_of(g: SmoothFn) -> SmoothFn:
    """exp∘g."""
    return SmoothFn(
        f"exp({g.descriptor})",
        lambda x0, order: jet_exp(g.eval_jet(x0, order)),
        g.domain,
    )


def fn_monomial(m: int, domain: Domain = REAL_LINE) -> SmoothFn:
    """x^m, exact for jet purposes (polynomial with prescribed jet at 0)."""
    if m < 0:
        raise StructuralError("monomial degree must be nonnegative")
    v = [0.0] * m + [float(math.factorial(m))]
    fn = fn_from_jet(0.0, v, domain)
    fn.descriptor = "1" if m == 0 else ("x" if m == 1 else f"x^{m}")
    return fn


def _smoothstep_jet(t_jet: Jet) -> Jet:
    """Jet of s(t) = e(t)/(e(t)+e(1-t)) with e(u)=exp(-1/u), for t in (0,1)."""
    one = jet_constant(t_jet.x0, 1.0, t_jet.order)
    num = jet_exp(-jet_reciprocal(t_jet))
    den = num + jet_exp(-jet_reciprocal(one - t_jet))
    return jet_product(num, jet_reciprocal(den))


def fn_bump(
    support: tuple[float, float],
    plateau: tuple[float, float],
    domain: Domain = REAL_LINE,
) -> SmoothFn:
    """C^∞ bump: 1 on the closed plateau, 0 outside the open support,
    values in [0, 1], all jets flat at both regimes."""
    a, b = float(support[0]), float(support[1])
    p, q = float(plateau[0]), float(plateau[1])
    if not (a < p <= q < b):
        raise StructuralError(
            f"plateau [{p}, {q}] must lie strictly inside the support ({a}, {b})"
        )

    def jet_fn(x0: float, order: int) -> Jet:
        if x0 <= a or x0 >= b:
            return jet_constant(x0, 0.0, order)
        if p <= x0 <= q:
            return jet_constant(x0, 1.0, order)
        if x0 < p:  # rising ramp on (a, p)
            scale = 1.0 / (p - a)
            t = Jet(x0, ((x0 - a) * scale, scale) + (0.0,) * max(0, order - 1))
            return _smoothstep_jet(t.truncate(order))
        # falling ramp on (q, b)
        scale = -1.0 / (b - q)
        t = Jet(x0, ((b - x0) * -scale, scale) + (0.0,) * max(0, order - 1))
        return _smoothstep_jet(t.truncate(order))

    return SmoothFn(f"bump({a},{b};[{p},{q}])", jet_fn, domain)
