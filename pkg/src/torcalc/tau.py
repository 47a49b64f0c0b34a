"""The lattice-quotient invariant of a 3-point germ.

From the exponent data of a germ at a 3-point of the source, two lattices
are formed: H, spanned by the exponent vectors of u, v and of every series
term of w, and A, spanned by u, v (2-point target) or u, v and the least
series term (3-point target).  The invariant is the order of H/A, with a
separate minus-infinity value reserved for monomial forms over 3-point
targets.

The group order can never be 0; the trivial quotient is reported as
Order(1).  (A vanishing value sometimes used elsewhere to flag monomial
w over a 2-point target is carried by form tags, not by this number.)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import MalformedGerm, NonUnimodular
from .germ import PointKind, ThreePointGerm
from .lattice import apply_sub, is_unimodular, lattice_index


@dataclass(frozen=True)
class TauValue:
    """Either Order(n) with n >= 1 or MinusInfinity (order is None)."""

    order: int | None

    def __post_init__(self):
        if self.order is not None and self.order < 1:
            raise ValueError("group order must be >= 1")

    @property
    def is_minus_infinity(self) -> bool:
        return self.order is None

    def __str__(self) -> str:
        return "-inf" if self.order is None else str(self.order)


MINUS_INFINITY = TauValue(None)


def h_generators(germ: ThreePointGerm) -> list[tuple[int, ...]]:
    return [germ.u_exp, germ.v_exp] + [m for _, m in germ.series_terms]


def a_generators(germ: ThreePointGerm) -> list[tuple[int, ...]]:
    gens = [germ.u_exp, germ.v_exp]
    if germ.target_kind == PointKind.THREE:
        m0 = germ.m0
        if m0 is not None:
            gens.append(m0)
    return gens


def tau_of(germ: ThreePointGerm) -> TauValue:
    """The quotient order, or MinusInfinity for a monomial form over a
    3-point target."""
    if not isinstance(germ, ThreePointGerm):
        raise MalformedGerm("tau_of expects a ThreePointGerm")
    if germ.target_kind == PointKind.THREE and not germ.series_terms:
        return MINUS_INFINITY
    idx = lattice_index(h_generators(germ), a_generators(germ))
    if idx is None:
        # A sits inside H with equal rank by construction, so this cannot
        # happen for a germ satisfying its invariants.
        raise MalformedGerm("quotient is infinite")
    return TauValue(idx)


def transform_germ_exponents(germ: ThreePointGerm, sub: Sequence[Sequence[int]],
                             check: bool = True) -> ThreePointGerm:
    """Right-multiply every exponent vector of the germ by a nonnegative
    unimodular chart matrix.

    The w-monomial may lose its non-divisibility against transformed series
    terms (restoring it is an analytic renormalization, out of scope at the
    exponent level), so the result skips that check; the quotient data reads
    only u, v and the series terms.
    """
    if check:
        if any(x < 0 for row in sub for x in row) or not is_unimodular(sub):
            raise NonUnimodular(f"{sub}")
    terms = tuple(sorted(((c, apply_sub(m, sub)) for c, m in germ.series_terms),
                         key=lambda t: (sum(t[1]), t[1])))
    return ThreePointGerm(
        u_exp=apply_sub(germ.u_exp, sub),
        v_exp=apply_sub(germ.v_exp, sub),
        series_terms=terms,
        n_exp=apply_sub(germ.n_exp, sub),
        target_kind=germ.target_kind,
    )


def tau_preserved_under(germ: ThreePointGerm, sub: Sequence[Sequence[int]]) -> tuple[TauValue, TauValue]:
    """(tau before, tau after) for a domain chart matrix; property suites
    assert the two are equal."""
    before = tau_of(germ)
    after = tau_of(transform_germ_exponents(germ, sub))
    return before, after
