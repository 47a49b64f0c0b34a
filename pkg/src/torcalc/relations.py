"""Pre-relation data model, strict transforms, and the effective resolver
for 3-point pre-relations.

A 3-point pre-relation is the numeric data (a, b, c, lambda) of a relation
u^a v^b w^c = lambda at a 3-point, with gcd(a, b, c) = 1 and mixed signs.
Writing it as a surface germ F = 0 and normalizing so that
F = w^cbar - lambda ubar^abar vbar^bbar, the resolver blows up one 2-curve
at a time following a fixed case analysis; along every root-to-leaf path
either cbar strictly drops, or cbar holds while abar+bbar strictly drops,
or the point leaves the strict transform.  The certificate records exactly
that descent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .blowup import Chart, ChartNode, ChartTree, TARGET, TWO_CURVE, monomial_chart
from .errors import InvalidCenterForm, MalformedGerm, StepBudgetExceeded
from .lattice import apply_sub

_NAMES = ("u", "v", "w")


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoPointPreRel:
    """w^e = lambda u^a v^b at a 2-point; a = b = None encodes the divisor
    case (w itself cuts the germ, e = 1, lambda = 1)."""

    e: int
    a: int | None
    b: int | None
    lam: Fraction

    def __post_init__(self):
        if (self.a is None) != (self.b is None):
            raise MalformedGerm("a and b must both be finite or both be absent")
        if self.a is None:
            if self.e != 1 or self.lam != 1:
                raise MalformedGerm("divisor case requires e = 1 and lambda = 1")
            return
        if self.e <= 1:
            raise MalformedGerm("e must exceed 1")
        if self.lam == 0:
            raise MalformedGerm("lambda must be nonzero")
        if gcd(gcd(abs(self.a), abs(self.b)), self.e) != 1:
            raise MalformedGerm("gcd(a, b, e) must be 1")


@dataclass(frozen=True)
class ThreePointPreRel:
    """u^a v^b w^c = lambda at a 3-point, gcd 1, mixed signs."""

    a: int
    b: int
    c: int
    lam: Fraction

    def __post_init__(self):
        e = (self.a, self.b, self.c)
        if gcd(gcd(abs(self.a), abs(self.b)), abs(self.c)) != 1:
            raise MalformedGerm("gcd(a, b, c) must be 1")
        if not (min(e) < 0 < max(e)):
            raise MalformedGerm("exponents must have mixed signs")
        if self.lam == 0:
            raise MalformedGerm("lambda must be nonzero")

    @property
    def exps(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class SurfaceForm:
    """F = lhs - coef * rhs as monomial dictionaries over u, v, w; is_unit
    flags the degenerate case where F does not vanish at the point."""

    lhs: tuple[tuple[str, int], ...]
    coef: Fraction
    rhs: tuple[tuple[str, int], ...]
    is_unit: bool = False

    def __str__(self) -> str:
        if self.is_unit:
            return "unit"
        def mono(factors):
            if not factors:
                return "1"
            return "*".join(v if k == 1 else f"{v}^{k}" for v, k in factors)
        return f"{mono(self.lhs)} - {self.coef}*{mono(self.rhs)}"


@dataclass(frozen=True)
class NormalForm3:
    """F = w^cbar - lam u^abar v^bbar with the side conditions
    abar = 0 => cbar <= bbar and bbar = 0 => cbar <= abar.  roles names the
    original variables playing the (ubar, vbar, wbar) parts."""

    abar: int
    bbar: int
    cbar: int
    lam: Fraction
    roles: tuple[str, str, str]

    def __post_init__(self):
        if self.abar < 0 or self.bbar < 0 or self.cbar <= 0:
            raise MalformedGerm("normal form needs abar, bbar >= 0 and cbar > 0")
        if self.abar == 0 and self.cbar > self.bbar:
            raise MalformedGerm("side condition abar = 0 => cbar <= bbar")
        if self.bbar == 0 and self.cbar > self.abar:
            raise MalformedGerm("side condition bbar = 0 => cbar <= abar")

    @property
    def measure(self) -> tuple[int, int]:
        """The lexicographic descent measure (cbar, abar + bbar)."""
        return (self.cbar, self.abar + self.bbar)

    def to_prerel(self) -> ThreePointPreRel:
        exps = {self.roles[0]: -self.abar, self.roles[1]: -self.bbar, self.roles[2]: self.cbar}
        return ThreePointPreRel(exps["u"], exps["v"], exps["w"], self.lam)


# ---------------------------------------------------------------------------
# Surface-germ forms
# ---------------------------------------------------------------------------


def f_form(prerel: TwoPointPreRel | ThreePointPreRel) -> SurfaceForm:
    """The sign-resolved surface germ F = 0 of a pre-relation."""
    if isinstance(prerel, TwoPointPreRel):
        if prerel.a is None:
            return SurfaceForm((("w", 1),), Fraction(0), ())
        a, b, e, lam = prerel.a, prerel.b, prerel.e, prerel.lam
        if a <= 0 and b <= 0:
            return SurfaceForm((), lam, (), is_unit=True)
        lhs = [("w", e)]
        rhs = []
        for name, k in (("u", a), ("v", b)):
            if k < 0:
                lhs.append((name, -k))
            elif k > 0:
                rhs.append((name, k))
        return SurfaceForm(tuple(lhs), lam, tuple(rhs))
    if not isinstance(prerel, ThreePointPreRel):
        raise MalformedGerm("not a pre-relation")
    exps = dict(zip(_NAMES, prerel.exps))
    positives = [n for n in _NAMES if exps[n] > 0]
    negatives = [n for n in _NAMES if exps[n] < 0]
    if len(positives) == 1:
        # x^p = lam * prod(others^-k): F = x^p - lam * rest.
        p = positives[0]
        lhs = ((p, exps[p]),)
        rhs = tuple((n, -exps[n]) for n in _NAMES if n != p and exps[n] != 0)
        return SurfaceForm(lhs, prerel.lam, rhs)
    # Exactly one negative: x^-n = (1/lam) * prod(others).
    n0 = negatives[0]
    lhs = ((n0, -exps[n0]),)
    rhs = tuple((n, exps[n]) for n in _NAMES if n != n0 and exps[n] != 0)
    return SurfaceForm(lhs, 1 / prerel.lam, rhs)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def normalize3(prerel: ThreePointPreRel) -> NormalForm3:
    """Deterministic normal form: prefer the reading that keeps lambda
    (single positive exponent as the wbar role); fall back to the inverted
    reading when the side conditions force it."""
    exps = dict(zip(_NAMES, prerel.exps))
    positives = [n for n in _NAMES if exps[n] > 0]
    negatives = [n for n in _NAMES if exps[n] < 0]
    candidates: list[tuple[int, int, int, Fraction, tuple[str, str, str]]] = []
    if len(positives) == 1:
        w_role = positives[0]
        others = tuple(n for n in _NAMES if n != w_role)
        candidates.append((-exps[others[0]], -exps[others[1]], exps[w_role],
                           prerel.lam, (*others, w_role)))
    if len(negatives) == 1:
        w_role = negatives[0]
        others = tuple(n for n in _NAMES if n != w_role)
        candidates.append((exps[others[0]], exps[others[1]], -exps[w_role],
                           1 / prerel.lam, (*others, w_role)))
    for abar, bbar, cbar, lam, roles in candidates:
        if abar == 0 and cbar > bbar:
            continue
        if bbar == 0 and cbar > abar:
            continue
        return NormalForm3(abar, bbar, cbar, lam, roles)
    raise MalformedGerm(f"no admissible normal form for {prerel.exps}")


# ---------------------------------------------------------------------------
# Strict transform of pre-relations under target charts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dropped:
    """The transformed point is off the strict transform: the transformed
    relation has no mixed signs, so F is a unit (or misses the point)."""

    exps: tuple[int, int, int]
    lam: Fraction

    @property
    def reason(self) -> str:
        if all(e >= 0 for e in self.exps):
            return "strict transform misses the 3-point"
        return "transformed relation is a unit"


def transform_prerel(prerel: TwoPointPreRel | ThreePointPreRel,
                     chart: Chart) -> TwoPointPreRel | ThreePointPreRel | Dropped:
    """Strict transform under a monomial target chart.

    The relation exponent vector transforms by the chart matrix; maximal
    division by the exceptional parameter and the gcd renormalization are
    automatic in this multiplicative form (the gcd is preserved).
    """
    if chart.side != TARGET or not chart.is_monomial:
        raise InvalidCenterForm("pre-relations transform under monomial target charts")
    sub = chart.sub
    if isinstance(prerel, ThreePointPreRel):
        if chart.center_kind != TWO_CURVE:
            raise InvalidCenterForm("admissible centers for 3-point pre-relations are 2-curves")
        new = apply_sub(prerel.exps, sub)
        if min(new) < 0 < max(new):
            return ThreePointPreRel(new[0], new[1], new[2], prerel.lam)
        return Dropped(tuple(new), prerel.lam)
    if not isinstance(prerel, TwoPointPreRel):
        raise MalformedGerm("not a pre-relation")
    if prerel.a is None:
        # Divisor case: the strict transform of w = 0 is again w = 0.
        return prerel
    vec = (-prerel.a, -prerel.b, prerel.e)
    new = apply_sub(vec, sub)
    if new[2] != prerel.e:
        raise InvalidCenterForm("chart folds w into the boundary of a 2-point relation")
    return TwoPointPreRel(prerel.e, -new[0], -new[1], prerel.lam)


# ---------------------------------------------------------------------------
# The resolver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertStep:
    """One edge of the resolution tree."""

    case_tag: str
    chart_label: str
    before: tuple[int, int]
    after: tuple[int, int] | None
    exit_reason: str | None = None

    def descent_ok(self) -> bool:
        if self.after is None:
            return True
        c0, s0 = self.before
        c1, s1 = self.after
        return c1 < c0 or (c1 == c0 and s1 < s0)


@dataclass
class ResolveCertificate:
    steps: list[tuple[int, int, CertStep]] = field(default_factory=list)
    # entries: (parent node id, child node id, step record)

    def all_descent_ok(self) -> bool:
        return all(step.descent_ok() for _, _, step in self.steps)


def _role_chart(nf: NormalForm3, folded_role: int, exceptional_role: int, tag: str) -> Chart:
    """Chart of the blow-up of the 2-curve cut by the folded and exceptional
    role variables, expressed over the original variable order."""
    fold_var = nf.roles[folded_role]
    exc_var = nf.roles[exceptional_role]
    rows = [[1 if j == i else 0 for j in range(3)] for i in range(3)]
    fi, ei = _NAMES.index(fold_var), _NAMES.index(exc_var)
    rows[fi][ei] += 1
    return monomial_chart(TARGET, TWO_CURVE,
                          f"{tag}:2curve({fold_var},{exc_var}):{exc_var}-chart",
                          [tuple(r) for r in rows])


def resolve3_step(nf: NormalForm3) -> list[tuple[Chart, NormalForm3 | Dropped]]:
    """The proof-driven expansion at one normal form.

    Case sum_lt (abar+bbar < cbar): blow up the (ubar, wbar) curve; both
    charts stay on the strict transform and drop cbar.  Case ubar_ge
    (abar >= cbar): same curve; the exceptional chart always exits, the
    other drops cbar or holds it while abar+bbar drops.  Case vbar_ge is
    the u<->v mirror.  Case final (abar+bbar >= cbar, both below cbar):
    both charts drop cbar.
    """
    a, b, c = nf.abar, nf.bbar, nf.cbar
    if a + b < c:
        tag = "sum_lt"
        pair = (0, 2)
    elif a >= c:
        tag = "ubar_ge"
        pair = (0, 2)
    elif b >= c:
        tag = "vbar_ge"
        pair = (1, 2)
    else:
        tag = "final"
        pair = (0, 2)
    prerel = nf.to_prerel()
    out = []
    for folded, exceptional in (pair, pair[::-1]):
        chart = _role_chart(nf, folded, exceptional, tag)
        child = transform_prerel(prerel, chart)
        if isinstance(child, ThreePointPreRel):
            out.append((chart, normalize3(child)))
        else:
            out.append((chart, child))
    return out


def resolve3(prerel: ThreePointPreRel, max_steps: int = 200) -> tuple[ChartTree, ResolveCertificate]:
    """Resolve a 3-point pre-relation by iterated 2-curve blow-ups.

    The tree's internal nodes hold normal forms; every leaf is a Dropped
    marker (the strict transform is a unit there or misses the point).
    max_steps bounds the number of node expansions; exceeding it raises
    StepBudgetExceeded, which the termination argument rules out for valid
    inputs.
    """
    nf = normalize3(prerel)
    tree = ChartTree(ChartNode(0, nf, None))
    cert = ResolveCertificate()
    frontier = [tree.root]
    expansions = 0
    while frontier:
        node = frontier.pop()
        payload = node.payload
        if isinstance(payload, Dropped):
            continue
        expansions += 1
        if expansions > max_steps:
            raise StepBudgetExceeded(f"more than {max_steps} expansions")
        case_tag = None
        for chart, child in resolve3_step(payload):
            case_tag = chart.label.split(":", 1)[0]
            cn = tree.add_child(node, chart, child)
            if isinstance(child, NormalForm3):
                cert.steps.append((node.node_id, cn.node_id,
                                   CertStep(case_tag, chart.label, payload.measure,
                                            child.measure)))
                frontier.append(cn)
            else:
                cert.steps.append((node.node_id, cn.node_id,
                                   CertStep(case_tag, chart.label, payload.measure,
                                            None, child.reason)))
    return tree, cert


def resolved_leaf_kinds(tree: ChartTree) -> list[str]:
    return [leaf.payload.reason for leaf in tree.leaves() if isinstance(leaf.payload, Dropped)]
