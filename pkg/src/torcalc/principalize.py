"""Principalization of monomial ideals on a smooth fan by the lexicographic
curve invariant.

At a 2-cone with rays (r1, r2), two divisors have local exponents (a, b)
and (c, d); the curve invariant is the lexicographic maximum of
(|a-c|, |b-d|) and its swap when the differences are nonzero of opposite
signs, and minus-infinity otherwise.  The fan invariant is the maximum over
all 2-cones (and, for more than two divisors, over all pairs); it is
minus-infinity exactly when the ideal is locally principal.  Blowing up
every curve achieving the maximum strictly drops the fan invariant, so the
iteration terminates.

Several divisors reduce to the pair case two at a time: once a pair is
principal everywhere, its chartwise generator glues to the per-ray minimum
of the two pullbacks and replaces the pair.  The mixed strategy works on
the whole set at once and may first subdivide a maximal cone carrying two
or more of the current maximal curves; the corner step is guarded (it is
skipped whenever a prospective new face would reach the current maximum),
which keeps the round-by-round descent strict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .errors import StepBudgetExceeded
from .fan import Divisor, Ray, SmoothFan, chart_exponents, star_subdivide_2cone, star_subdivide_3cone

OmegaPair = tuple[int, int]


@dataclass(frozen=True)
class OmegaValue:
    """Minus-infinity (pair is None) or a lexicographic pair."""

    pair: OmegaPair | None

    @property
    def is_minus_infinity(self) -> bool:
        return self.pair is None

    def __lt__(self, other: "OmegaValue") -> bool:
        if self.pair is None:
            return other.pair is not None
        if other.pair is None:
            return False
        return self.pair < other.pair

    def __le__(self, other: "OmegaValue") -> bool:
        return self == other or self < other

    def __str__(self) -> str:
        return "-inf" if self.pair is None else str(self.pair)


MINUS_INFINITY = OmegaValue(None)


def omega(a: int, b: int, c: int, d: int) -> OmegaValue:
    """Curve invariant from the local exponents (a, b) and (c, d) of two
    divisors at a 2-curve."""
    da, db = a - c, b - d
    if da != 0 and db != 0 and (da > 0) != (db > 0):
        x, y = abs(da), abs(db)
        return OmegaValue(max((x, y), (y, x)))
    return MINUS_INFINITY


def omega_bar(fan: SmoothFan, d1: Divisor, d2: Divisor) -> OmegaValue:
    """Maximum of the curve invariant over all 2-cones of the fan."""
    return _omega_bar_set(fan, [d1, d2])


def _pair_omegas(divisors: Sequence[Divisor], i: int, j: int) -> OmegaValue:
    best = MINUS_INFINITY
    for a, b in combinations(divisors, 2):
        w = omega(a[i], a[j], b[i], b[j])
        if best < w:
            best = w
    return best


def _omega_bar_set(fan: SmoothFan, divisors: Sequence[Divisor]) -> OmegaValue:
    best = MINUS_INFINITY
    for i, j in fan.two_cones():
        w = _pair_omegas(divisors, i, j)
        if best < w:
            best = w
    return best


def is_locally_principal(fan: SmoothFan, divisors: Sequence[Divisor]) -> bool:
    """True when in every chart some divisor's exponents divide every
    other divisor's componentwise."""
    if len(divisors) <= 1:
        return True
    for cone in fan.max_cones:
        exps = [chart_exponents(fan, d, cone) for d in divisors]
        if not any(all(all(a[k] <= b[k] for k in range(3)) for b in exps) for a in exps):
            return False
    return True


@dataclass
class Round:
    number: int
    omega_bar: OmegaValue
    centers: list[tuple[str, tuple[Ray, ...]]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "round": self.number,
            "omega_bar": None if self.omega_bar.is_minus_infinity else list(self.omega_bar.pair),
            "centers": [{"kind": kind, "rays": [list(r) for r in rays]}
                        for kind, rays in self.centers],
        }


def _default_budget(first: OmegaValue) -> int:
    if first.is_minus_infinity:
        return 1
    return 10 * (first.pair[0] + 1)


def _descend(fan: SmoothFan, divisors: list[Divisor], budget: int | None,
             corner_steps: bool, active: int | None = None) -> tuple[SmoothFan, list[Divisor], list[Round]]:
    """The shared round loop.  The leading `active` divisors drive the
    invariant (all of them when None); the rest ride along through every
    subdivision.  With corner_steps, a maximal cone whose faces carry two
    or more maximal curves is subdivided at its barycenter first, provided
    no prospective new face reaches the current maximum."""
    driving = divisors[:active] if active is not None else divisors
    current = _omega_bar_set(fan, driving)
    if budget is None:
        budget = _default_budget(current)
    history: list[Round] = []
    rounds = 0
    while not current.is_minus_infinity:
        rounds += 1
        if rounds > budget:
            raise StepBudgetExceeded(f"principalization exceeded {budget} rounds")
        rec = Round(rounds, current)
        target_pairs = sorted(
            p for p in fan.two_cones()
            if _pair_omegas(driving, p[0], p[1]) == current
        )
        target_rays = [(fan.rays[i], fan.rays[j]) for i, j in target_pairs]
        if corner_steps:
            fan, divisors = _corner_pass(fan, divisors, driving, set(target_pairs), current, rec)
            driving = divisors[:active] if active is not None else divisors
        for r1, r2 in target_rays:
            idx = tuple(sorted((fan.rays.index(r1), fan.rays.index(r2))))
            rec.centers.append(("2curve", (r1, r2)))
            fan, divisors = star_subdivide_2cone(fan, idx, divisors)
        history.append(rec)
        driving = divisors[:active] if active is not None else divisors
        new = _omega_bar_set(fan, driving)
        if not new < current:
            raise StepBudgetExceeded(f"fan invariant failed to drop: {current} -> {new}")
        current = new
    return fan, divisors, history


def _corner_pass(fan: SmoothFan, divisors: list[Divisor], driving: Sequence[Divisor],
                 targets: set[tuple[int, int]], current: OmegaValue,
                 rec: Round) -> tuple[SmoothFan, list[Divisor]]:
    for cone in list(fan.max_cones):
        s = sorted(cone)
        faces = [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])]
        if sum(f in targets for f in faces) < 2:
            continue
        # Guard: every prospective face at the new ray must stay strictly
        # below the current maximum.
        new_coefs = [sum(d[i] for i in cone) for d in driving]
        safe = all(
            omega(driving[a][i], new_coefs[a], driving[b][i], new_coefs[b]) < current
            for i in cone
            for a in range(len(driving))
            for b in range(a + 1, len(driving))
        )
        if not safe:
            continue
        rec.centers.append(("3point", tuple(fan.rays[i] for i in cone)))
        fan, divisors = star_subdivide_3cone(fan, cone, divisors)
    return fan, divisors


def principalize_pair(fan: SmoothFan, d1: Divisor, d2: Divisor,
                      budget: int | None = None) -> tuple[SmoothFan, list[Divisor], list[Round]]:
    """Blow up the maximal curves of the pair until the ideal is locally
    principal; the history of fan invariants is strictly lex-decreasing."""
    return _descend(fan, [tuple(d1), tuple(d2)], budget, corner_steps=False)


def principalize_many(fan: SmoothFan, divisors: Sequence[Divisor],
                      budget: int | None = None) -> tuple[SmoothFan, list[Divisor], list[Round]]:
    """Pairwise reduction: the invariant drives the accumulator against one
    divisor at a time while everything else rides along.  Returns the
    pullbacks of all input divisors on the final fan; the glued generator
    of each principalized pair drives the next step but is not returned."""
    work = [tuple(d) for d in divisors]
    if len(work) <= 1:
        return fan, work, []
    history: list[Round] = []
    acc = work[0]
    for k in range(1, len(work)):
        riding = [acc, work[k]] + work
        fan, riding, h = _descend(fan, riding, budget, corner_steps=False, active=2)
        for r in h:
            r.number += len(history)
        history.extend(h)
        acc = tuple(min(a, b) for a, b in zip(riding[0], riding[1]))
        work = riding[2:]
    return fan, work, history


def principalize_with_3points(fan: SmoothFan, divisors: Sequence[Divisor],
                              budget: int | None = None) -> tuple[SmoothFan, list[Divisor], list[Round]]:
    """Mixed strategy: the whole divisor set at once, with guarded corner
    subdivisions at maximal cones carrying two or more maximal curves."""
    work = [tuple(d) for d in divisors]
    if len(work) <= 1:
        return fan, work, []
    return _descend(fan, work, budget, corner_steps=True)
