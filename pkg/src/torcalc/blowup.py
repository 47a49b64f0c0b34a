"""Chart transformations under blow-ups, and the point-ideal descent.

Domain-side blow-ups of 2-curves and points act on germ payloads by
monomial substitution (optionally with translation constants); target-side
blow-ups of admissible centers act on pre-relation exponent data.  Both are
recorded as Chart values carrying enough provenance to replay any leaf of a
chart tree from its root.

The point-ideal descent tracks the two controlled shapes in which the
pulled-back maximal ideal of a target point can fail to be invertible, and
blows up the responsible curve until every chart is resolved.  Its integer
invariant drops by exactly one on every non-resolved child.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import InvalidCenterForm, MalformedGerm
from .germ import DEFAULT_TRUNC, Germ, Payload, PointKind, classify
from .lattice import apply_sub, is_unimodular
from .series import TruncSeries

Exp = tuple[int, int, int]

DOMAIN = "domain"
TARGET = "target"

TWO_CURVE = "2curve"
TWO_POINT = "2point"
THREE_POINT = "3point"
CURVE_1PT = "curve1pt"

_AXIS_NAMES = ("x", "y", "z")
_PARAM_NAMES = ("u", "v", "w")


@dataclass(frozen=True)
class Chart:
    """One affine chart of a blow-up.

    `images[i]` describes the substitution for old coordinate i as
    (exponents of the monomial part, translated axis or None, constant):
    old_i = new^exp * (new_axis + constant) when a translation is present,
    else old_i = new^exp.  Monomial charts have no translations and their
    matrix of exponent rows is unimodular and nonnegative.
    """

    side: str
    center_kind: str
    label: str
    images: tuple[tuple[Exp, int | None, Fraction | None], ...]

    @property
    def sub(self) -> tuple[Exp, ...]:
        """Exponent matrix of the monomial part (translated factors counted
        at their monomial support)."""
        rows = []
        for exp, axis, _const in self.images:
            if axis is None:
                rows.append(exp)
            else:
                e = list(exp)
                e[axis] += 1
                rows.append(tuple(e))
        return tuple(rows)

    @property
    def is_monomial(self) -> bool:
        return all(axis is None for _, axis, _ in self.images)

    def image_series(self, trunc: int) -> tuple[TruncSeries, TruncSeries, TruncSeries]:
        out = []
        for exp, axis, const in self.images:
            if axis is None:
                out.append(TruncSeries.monomial(exp))
            else:
                unit = tuple(1 if i == axis else 0 for i in range(3))
                terms = {tuple(a + b for a, b in zip(exp, unit)): Fraction(1)}
                if const:
                    terms[exp] = Fraction(const)
                out.append(TruncSeries.from_terms(terms))
        return tuple(out)

    def substitution_text(self) -> str:
        parts = []
        names = _AXIS_NAMES if self.side == DOMAIN else _PARAM_NAMES
        for i, (exp, axis, const) in enumerate(self.images):
            mono = "".join(f"{names[j]}'" + (f"^{exp[j]}" if exp[j] > 1 else "")
                           for j in range(3) if exp[j] > 0) or "1"
            if axis is None:
                rhs = mono
            else:
                shift = f"{names[axis]}'" + (f"+{const}" if const else "")
                rhs = f"{mono}*({shift})" if mono != "1" else f"({shift})"
            parts.append(f"{names[i]}={rhs}")
        return ", ".join(parts)


def monomial_chart(side: str, center_kind: str, label: str, rows: Sequence[Exp]) -> Chart:
    chart = Chart(side, center_kind, label, tuple((tuple(r), None, None) for r in rows))
    if not is_unimodular(chart.sub) or any(x < 0 for row in chart.sub for x in row):
        raise InvalidCenterForm(f"chart {label} is not a nonnegative unimodular substitution")
    return chart


@dataclass(frozen=True)
class Center:
    """A local blow-up center on the domain side: which kind, and which
    coordinate axes cut it (two axes for a curve, all three for a point)."""

    kind: str
    axes: tuple[int, ...] = (0, 1)


# ---------------------------------------------------------------------------
# Germ transforms
# ---------------------------------------------------------------------------


def _boundary_support(chart: Chart, domain_kind: PointKind) -> tuple[int, ...]:
    """New boundary axes: union of the supports of the images of the old
    boundary coordinates (translated factors are units and contribute only
    their monomial part)."""
    support: set[int] = set()
    for i in range(domain_kind.value):
        exp, axis, const = chart.images[i]
        support.update(j for j in range(3) if exp[j] > 0)
    return tuple(sorted(support))


def _axis_permutation(boundary: tuple[int, ...]) -> tuple[int, ...] | None:
    """Permutation sending the boundary axes to the leading positions while
    keeping relative order; None when already in place."""
    rest = [i for i in range(3) if i not in boundary]
    order = list(boundary) + rest
    if order == [0, 1, 2]:
        return None
    return tuple(order)


def transform_payload(p: Payload, chart: Chart, trunc: int) -> Payload:
    if chart.is_monomial:
        sub = chart.sub
        exp = apply_sub(p.exp, sub)
        if p.series is None:
            return Payload(p.coef, exp)
        terms = {apply_sub(e, sub): c for e, c in p.series.terms}
        if p.series.exact:
            s = TruncSeries.from_terms(terms, exact=True)
        else:
            # Substitution never lowers degree, so the old window still
            # certifies; mapped terms beyond it may merge with unknown tail
            # terms and are dropped.
            s = TruncSeries.from_terms(terms, trunc=p.series.trunc, exact=False)
        return Payload.with_series(exp, s, p.coef)
    images = chart.image_series(trunc)
    total = p.to_series().substitute(images)
    if total.is_zero:
        raise MalformedGerm("payload vanished under chart substitution")
    base = tuple(min(e[i] for e, _ in total.terms) for i in range(3))
    shifted = {tuple(a - b for a, b in zip(e, base)): c for e, c in total.terms}
    s = TruncSeries.from_terms(shifted, trunc=total.trunc, exact=total.exact)
    if len(s.terms) == 1 and s.terms[0][0] == (0, 0, 0):
        return Payload(s.terms[0][1], base)
    return Payload.with_series(base, s)


def transform_germ(germ: Germ, chart: Chart, trunc: int = DEFAULT_TRUNC) -> Germ:
    """Substitute a domain chart into the germ payloads, re-deriving the
    source point kind and restoring the boundary-first axis convention."""
    boundary = _boundary_support(chart, germ.domain_kind)
    perm = _axis_permutation(boundary)
    if perm is not None:
        pm = tuple(tuple(1 if perm[j] == i else 0 for j in range(3)) for i in range(3))
        images = tuple((apply_sub(exp, pm), perm.index(axis) if axis is not None else None, const)
                       for exp, axis, const in chart.images)
        chart = Chart(chart.side, chart.center_kind, chart.label + "|perm", images)
        boundary = tuple(range(len(boundary)))
    new_kind = PointKind(len(boundary))
    payloads = [transform_payload(p, chart, trunc) for p in germ.payloads]
    out = Germ(germ.target_kind, new_kind, *payloads, constants=dict(germ.constants))
    return replace(out, form_tag=classify(out))


def domain_charts(center: Center, germ: Germ,
                  translations: Sequence[Fraction] = ()) -> list[tuple[Chart, Germ]]:
    """Charts of the blow-up of a local center through the source point,
    with the transformed germ in each chart.

    A 2-curve through a 2- or 3-point yields 2 monomial charts; a point
    center yields 3 monomial charts.  Nonzero constants in `translations`
    add the translated charts that meet the exceptional divisor away from
    the monomial chart origins.
    """
    k = germ.domain_kind.value
    charts: list[Chart] = []
    if center.kind == TWO_CURVE:
        i, j = center.axes
        if i >= k or j >= k or i == j:
            raise InvalidCenterForm(f"axes {center.axes} do not cut a 2-curve at a {k}-point")
        for exc, other in ((i, j), (j, i)):
            rows = [_unit_row(t) for t in range(3)]
            rows[other] = _add_rows(_unit_row(other), _unit_row(exc))
            charts.append(monomial_chart(
                DOMAIN, TWO_CURVE,
                f"2curve({_AXIS_NAMES[i]},{_AXIS_NAMES[j]}):{_AXIS_NAMES[exc]}-chart", rows))
        for alpha in translations:
            if alpha == 0:
                continue
            images = [( _unit_row(t), None, None) for t in range(3)]
            images[j] = (_unit_row(i), j, Fraction(alpha))
            charts.append(Chart(DOMAIN, TWO_CURVE,
                                f"2curve({_AXIS_NAMES[i]},{_AXIS_NAMES[j]}):trans({alpha})",
                                tuple(images)))
    elif center.kind in (TWO_POINT, THREE_POINT):
        wanted = PointKind.THREE if center.kind == THREE_POINT else PointKind.TWO
        if germ.domain_kind != wanted:
            raise InvalidCenterForm(f"{center.kind} center at a {k}-point")
        for exc in range(3):
            rows = []
            for t in range(3):
                rows.append(_unit_row(exc) if t == exc else _add_rows(_unit_row(t), _unit_row(exc)))
            charts.append(monomial_chart(DOMAIN, center.kind,
                                         f"{center.kind}:{_AXIS_NAMES[exc]}-chart", rows))
        # Translated charts sit on the exceptional divisor of the x-chart
        # away from the axes: x = x', y = x'(y' + alpha), z = x'(z' + beta).
        for consts in translations:
            alpha, beta = consts if isinstance(consts, tuple) else (consts, Fraction(0))
            if alpha == 0:
                continue
            images = (
                (_unit_row(0), None, None),
                (_unit_row(0), 1, Fraction(alpha)),
                (_unit_row(0), 2, Fraction(beta)),
            )
            charts.append(Chart(DOMAIN, center.kind,
                                f"{center.kind}:trans({alpha},{beta})", images))
    else:
        raise InvalidCenterForm(f"unsupported domain center {center.kind}")
    return [(c, transform_germ(germ, c)) for c in charts]


def _unit_row(i: int) -> Exp:
    return tuple(1 if j == i else 0 for j in range(3))


def _add_rows(a: Exp, b: Exp) -> Exp:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Target charts for pre-relation parameters
# ---------------------------------------------------------------------------


def target_charts(center_form: int, axes: tuple[int, int] | None = None) -> list[Chart]:
    """Monomial charts of the blow-up of an admissible center at the target.

    center_form 1: the point u = v = w = 0; both 2-point charts are
    emitted (the u<->v swap pair).  center_form 2: the 2-curve u = v = 0;
    both charts.  center_form 3: a curve u = w = 0 (axes pick the pair);
    only the chart keeping a 2-point is emitted with a transform, the other
    side crosses into a 3-point.
    """
    charts = []
    if center_form == 1:
        for exc, folded in ((0, 1), (1, 0)):
            rows = [_unit_row(t) for t in range(3)]
            rows[folded] = _add_rows(_unit_row(folded), _unit_row(exc))
            rows[2] = _add_rows(_unit_row(2), _unit_row(exc))
            charts.append(monomial_chart(TARGET, TWO_POINT,
                                         f"point:{_PARAM_NAMES[exc]}-chart", rows))
    elif center_form == 2:
        for exc, folded in ((0, 1), (1, 0)):
            rows = [_unit_row(t) for t in range(3)]
            rows[folded] = _add_rows(_unit_row(folded), _unit_row(exc))
            charts.append(monomial_chart(TARGET, TWO_CURVE,
                                         f"2curve(u,v):{_PARAM_NAMES[exc]}-chart", rows))
    elif center_form == 3:
        i, j = axes if axes is not None else (0, 2)
        if j != 2 or i not in (0, 1):
            raise InvalidCenterForm("form-3 centers cut w together with u or v")
        for exc, folded in ((i, 2), (2, i)):
            rows = [_unit_row(t) for t in range(3)]
            rows[folded] = _add_rows(_unit_row(folded), _unit_row(exc))
            charts.append(monomial_chart(TARGET, CURVE_1PT,
                                         f"curve({_PARAM_NAMES[i]},w):{_PARAM_NAMES[exc]}-chart",
                                         rows))
    else:
        raise InvalidCenterForm(f"center form {center_form}")
    return charts


# ---------------------------------------------------------------------------
# Point-ideal descent
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DescentState:
    """A point where the pulled-back maximal ideal is not invertible.

    shape "1pt": u = x^a, v = x^b(alpha + y), w = x^d z with d < min(a, b);
    the curve x = z = 0 carries invariant min(a, b) - d.

    shape "2pt": u = x^a y^b, v = x^c y^d, w = x^g y^h z with
    (g, h) <= (min(a, c), min(b, d)) componentwise; both curves x = z = 0
    and y = z = 0 may be non-invertible loci, and the invariant is the sum
    of their positive gaps.
    """

    shape: str
    a: int
    b: int
    d: int = 0
    c: int = 0
    g: int = 0
    h: int = 0

    def __post_init__(self):
        if self.shape == "1pt":
            if not self.d < min(self.a, self.b):
                raise MalformedGerm("1-point state needs d < min(a, b)")
        elif self.shape == "2pt":
            if self.a * self.d - self.b * self.c == 0:
                raise MalformedGerm("2-point state needs ad - bc != 0")
            if self.g > min(self.a, self.c) or self.h > min(self.b, self.d):
                raise MalformedGerm("2-point state needs (g,h) <= componentwise min")
        else:
            raise MalformedGerm(f"unknown state shape {self.shape}")

    @property
    def invariant_a(self) -> int:
        if self.shape == "1pt":
            return min(self.a, self.b) - self.d
        return (min(self.a, self.c) - self.g) + (min(self.b, self.d) - self.h)


@dataclass(frozen=True)
class Resolved:
    """Leaf of the descent: the monomial contents of u, v, w in this chart
    (unit factors stripped), on which the point ideal is principal."""

    exps: tuple[Exp, Exp, Exp]
    reason: str


def _state_exps(state: DescentState) -> tuple[Exp, Exp, Exp]:
    """Monomial contents of u, v, w at the state's point (unit factors
    stripped; w carries the residual z)."""
    if state.shape == "1pt":
        return ((state.a, 0, 0), (state.b, 0, 0), (state.d, 0, 1))
    return ((state.a, state.b, 0), (state.c, state.d, 0), (state.g, state.h, 1))


def a_descent_step(state: DescentState,
                   beta: Fraction = Fraction(1)) -> list[tuple[Chart, DescentState | Resolved]]:
    """Blow up the active non-invertible curve through the state's point.

    Children: a translated chart at a nonzero constant (resolved), the
    monomial chart along the curve (a new state with invariant one less,
    or resolved), and the exceptional z-chart (always resolved).
    """
    if state.invariant_a <= 0:
        raise MalformedGerm("state is already resolved")
    if beta == 0:
        raise MalformedGerm("beta = 0 duplicates the monomial chart")
    axis = 0 if state.shape == "1pt" or min(state.a, state.c) - state.g > 0 else 1
    axis_name = _AXIS_NAMES[axis]
    ue, ve, we = _state_exps(state)

    images_beta = [(_unit_row(t), None, None) for t in range(3)]
    images_beta[2] = (_unit_row(axis), 2, Fraction(beta))
    chart_beta = Chart(DOMAIN, CURVE_1PT, f"curve({axis_name},z):trans({beta})",
                       tuple(images_beta))
    rows0 = [_unit_row(t) for t in range(3)]
    rows0[2] = _add_rows(_unit_row(2), _unit_row(axis))
    chart0 = monomial_chart(DOMAIN, CURVE_1PT, f"curve({axis_name},z):{axis_name}-chart", rows0)
    rows_z = [_unit_row(t) for t in range(3)]
    rows_z[axis] = _add_rows(_unit_row(axis), _unit_row(2))
    chart_z = monomial_chart(DOMAIN, CURVE_1PT, f"curve({axis_name},z):z-chart", rows_z)

    def bump(e: Exp) -> Exp:
        out = list(e)
        out[axis] += 1
        return tuple(out)

    out: list[tuple[Chart, DescentState | Resolved]] = []
    # Translated chart: w picks up one exceptional power and its (z + beta)
    # factor becomes a unit.
    w_beta = bump((we[0], we[1], 0))
    out.append((chart_beta, Resolved((ue, ve, w_beta), "translation makes w monomial by a unit")))
    # Exceptional chart: every payload is multiplied through by the new
    # coordinate.
    exps_z = tuple(apply_sub(e, chart_z.sub) for e in (ue, ve, we))
    out.append((chart_z, Resolved(exps_z, "exceptional chart absorbs the gap")))
    # Monomial chart along the curve: the state persists with the w-gap
    # narrowed by one, or resolves when the gap closes.
    if state.shape == "1pt":
        child_state = replace(state, d=state.d + 1) if state.d + 1 < min(state.a, state.b) else None
    else:
        bumped = replace(state, g=state.g + 1) if axis == 0 else replace(state, h=state.h + 1)
        child_state = bumped if bumped.invariant_a > 0 else None
    if child_state is not None:
        out.append((chart0, child_state))
    else:
        exps0 = tuple(apply_sub(e, chart0.sub) for e in (ue, ve, we))
        out.append((chart0, Resolved(exps0, "gap closed")))
    return out


def run_a_descent(state: DescentState, beta: Fraction = Fraction(1)) -> "ChartTree":
    """Expand the descent to a full tree; every leaf is Resolved."""
    tree = ChartTree(ChartNode(0, state, None))
    frontier = [tree.root]
    while frontier:
        node = frontier.pop()
        if isinstance(node.payload, Resolved):
            continue
        for chart, child in a_descent_step(node.payload, beta):
            cn = tree.add_child(node, chart, child)
            if isinstance(child, DescentState):
                frontier.append(cn)
    return tree


def point_ideal_invertible(exps: Sequence[Exp]) -> bool:
    """Whether some monomial divides all the others componentwise."""
    return any(all(all(a[i] <= b[i] for i in range(3)) for b in exps) for a in exps)


# ---------------------------------------------------------------------------
# Chart trees
# ---------------------------------------------------------------------------


@dataclass
class ChartNode:
    node_id: int
    payload: object
    chart: Chart | None
    children: list["ChartNode"] = field(default_factory=list)


@dataclass
class ChartTree:
    root: ChartNode
    _next_id: int = 1

    def add_child(self, parent: ChartNode, chart: Chart, payload: object) -> ChartNode:
        node = ChartNode(self._next_id, payload, chart)
        self._next_id += 1
        parent.children.append(node)
        return node

    def nodes(self) -> Iterable[ChartNode]:
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def leaves(self) -> list[ChartNode]:
        return [n for n in self.nodes() if not n.children]

    def depth(self) -> int:
        def go(n: ChartNode) -> int:
            return 1 + max((go(c) for c in n.children), default=0)
        return go(self.root) - 1

    def to_dot(self, describe: Callable[[object], str] = str) -> str:
        lines = ["digraph chart_tree {", "  node [shape=box];"]
        for n in self.nodes():
            label = describe(n.payload).replace('"', "'")
            prefix = f"chart:{n.chart.label}" if n.chart else "root"
            lines.append(f'  n{n.node_id} [label="{prefix}\\n{label}"];')
        for n in self.nodes():
            for c in n.children:
                sub = c.chart.substitution_text().replace('"', "'")
                lines.append(f'  n{n.node_id} -> n{c.node_id} [label="{sub}"];')
        lines.append("}")
        return "\n".join(lines)

    def to_json(self, describe: Callable[[object], object] = str) -> dict:
        def go(n: ChartNode) -> dict:
            out = {
                "id": n.node_id,
                "payload": describe(n.payload),
                "children": [go(c) for c in n.children],
            }
            if n.chart is not None:
                out["chart"] = {
                    "label": n.chart.label,
                    "center": n.chart.center_kind,
                    "side": n.chart.side,
                    "substitution": n.chart.substitution_text(),
                    "sub_matrix": [list(r) for r in n.chart.sub],
                }
            return out
        return go(self.root)

    def replay(self, apply: Callable[[object, Chart], object],
               same: Callable[[object, object], bool]) -> bool:
        """Re-apply every recorded chart from the root; True when every
        node's payload is reproduced."""
        ok = True

        def go(n: ChartNode):
            nonlocal ok
            for c in n.children:
                redone = apply(n.payload, c.chart)
                if not same(redone, c.payload):
                    ok = False
                go(c)
        go(self.root)
        return ok
