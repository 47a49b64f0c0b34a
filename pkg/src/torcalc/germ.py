"""Local map-germ data model and normal-form classifier.

A germ records the pullbacks of the three target parameters u, v, w at a
point of the source, written in local coordinates x, y, z.  Each payload is
an exact rational coefficient times a monomial times an optional truncated
series factor.  The boundary at the source point consists of the leading
coordinates: x for a 1-point, x,y for a 2-point, x,y,z for a 3-point, and
similarly u / u,v / u,v,w at the target point.

The classifier is a recognizer of normal-form shapes, not a normalizer: it
matches payloads structurally against the template of each form and returns
the most specific tag.  Coefficients on bare coordinates are accepted since
rescaling a local coordinate is always permissible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import MalformedGerm, ParseError
from .lattice import det2, det3, rank_of
from .series import Exp, TruncSeries, ZERO3, _deg

DEFAULT_TRUNC = 8


class PointKind(enum.Enum):
    ONE = 1
    TWO = 2
    THREE = 3

    @property
    def label(self) -> str:
        return f"{self.value}-point"

    @staticmethod
    def from_label(s: str) -> "PointKind":
        for k in PointKind:
            if k.label == s or str(k.value) == s:
                return k
        raise ParseError(f"unknown point kind {s!r}")


# Form tags.
TF1 = "TF1"
TF21 = "TF21"
TF22 = "TF22"
TF3 = "TF3"
TF01 = "TF01"
TF02 = "TF02"
PREP2B = "Prep2b"
PREP2C = "Prep2c"
TOROIDAL = tuple(f"Toroidal{i}" for i in range(1, 7))
EQ16 = "Eq16"
UNCLASSIFIED = "Unclassified"

ALL_TAGS = (TF1, TF21, TF22, TF3, TF01, TF02, PREP2B, PREP2C, *TOROIDAL, EQ16, UNCLASSIFIED)


@dataclass(frozen=True)
class Payload:
    """coef * x^exp * series (series factor optional)."""

    coef: Fraction
    exp: Exp
    series: TruncSeries | None = None

    def __post_init__(self):
        if self.coef == 0:
            raise MalformedGerm("zero payload coefficient")
        if len(self.exp) != 3 or any(e < 0 for e in self.exp):
            raise MalformedGerm(f"bad payload exponent {self.exp}")

    @staticmethod
    def monomial(exp: Sequence[int], coef: Fraction | int = 1) -> "Payload":
        return Payload(Fraction(coef), tuple(exp))

    @staticmethod
    def with_series(exp: Sequence[int], series: TruncSeries, coef: Fraction | int = 1) -> "Payload":
        if series.is_zero:
            raise MalformedGerm("zero series factor")
        # Fold a constant series into the coefficient.
        if len(series.terms) == 1 and series.terms[0][0] == ZERO3:
            return Payload(Fraction(coef) * series.terms[0][1], tuple(exp))
        return Payload(Fraction(coef), tuple(exp), series)

    @property
    def is_monomial(self) -> bool:
        return self.series is None

    def to_series(self) -> TruncSeries:
        if self.series is None:
            return TruncSeries.monomial(self.exp, self.coef)
        return self.series.shift(self.exp).scale(self.coef)

    def term_exponents(self) -> list[Exp]:
        """Exponents of all stored terms of the expanded payload."""
        if self.series is None:
            return [self.exp]
        return [tuple(a + b for a, b in zip(self.exp, e)) for e, _ in self.series.terms]

    def ord_along(self, axis: int) -> int:
        """Exact order along a coordinate axis; the series factor
        contributes through its own certified order."""
        if self.series is None:
            return self.exp[axis]
        if self.series.is_unit:
            return self.exp[axis]
        extra = self.series.ord_along(axis)
        if extra is None:
            raise MalformedGerm("zero payload")
        return self.exp[axis] + extra


@dataclass(frozen=True)
class Germ:
    target_kind: PointKind
    domain_kind: PointKind
    u: Payload
    v: Payload
    w: Payload
    constants: dict[str, Fraction] = field(default_factory=dict)
    form_tag: str | None = None

    @property
    def payloads(self) -> tuple[Payload, Payload, Payload]:
        return (self.u, self.v, self.w)

    def domain_axes(self) -> tuple[int, ...]:
        return tuple(range(self.domain_kind.value))


# ---------------------------------------------------------------------------
# Shape helpers
# ---------------------------------------------------------------------------


def _pure(p: Payload) -> Exp | None:
    return p.exp if p.series is None else None


def _xy_only(e: Exp) -> bool:
    return e[2] == 0


def _x_only(e: Exp) -> bool:
    return e[1] == 0 and e[2] == 0


def _series_is_translated_coord(s: TruncSeries | None, axis: int) -> Fraction | None:
    """Match a series of the exact shape (alpha + c*x_axis) with alpha, c
    nonzero; returns alpha on success."""
    if s is None or len(s.terms) != 2:
        return None
    d = s.as_dict()
    alpha = d.get(ZERO3, Fraction(0))
    unit = tuple(1 if i == axis else 0 for i in range(3))
    if alpha != 0 and unit in d:
        return alpha
    return None


def _split_z(s: TruncSeries) -> tuple[dict[Exp, Fraction], dict[Exp, Fraction], bool]:
    """Split stored terms into z-free and z-linear parts; the flag reports
    whether any term of z-degree >= 2 exists."""
    zfree: dict[Exp, Fraction] = {}
    zlin: dict[Exp, Fraction] = {}
    higher = False
    for e, c in s.terms:
        if e[2] == 0:
            zfree[e] = c
        elif e[2] == 1:
            zlin[e] = c
        else:
            higher = True
    return zfree, zlin, higher


def _single_z_term(zlin: dict[Exp, Fraction], require_no_y: bool) -> Exp | None:
    if len(zlin) != 1:
        return None
    (e, _), = zlin.items()
    if require_no_y and e[1] != 0:
        return None
    return e


def _primitive_direction(e: Exp) -> tuple[int, int, int] | None:
    """(a, b, k) with e == (k*a, k*b, 0), a, b > 0, gcd(a, b) = 1."""
    if e[2] != 0 or e[0] <= 0 or e[1] <= 0:
        return None
    k = gcd(e[0], e[1])
    return (e[0] // k, e[1] // k, k)


def _is_unit_or_zero_in_xy(zfree: dict[Exp, Fraction]) -> bool:
    """Whether the z-free part is zero or a unit series (nonzero constant
    term)."""
    return not zfree or zfree.get(ZERO3, Fraction(0)) != 0


def _monomial_part_split(terms: dict[Exp, Fraction], direction: tuple[int, int]):
    """Split terms into those of shape (i*a, i*b, j) (series in the bound
    monomial and z) and the rest.  Requires a, b > 0."""
    a, b = direction
    inside: dict[Exp, Fraction] = {}
    outside: dict[Exp, Fraction] = {}
    for e, c in terms.items():
        if a * e[1] == b * e[0] and e[0] % a == 0:
            inside[e] = c
        else:
            outside[e] = c
    return inside, outside


# ---------------------------------------------------------------------------
# Per-form validators.  Each returns a list of violation strings; the form
# matches when the list is empty.
# ---------------------------------------------------------------------------


def _check_toroidal1(g: Germ) -> list[str]:
    out = []
    if g.domain_kind != PointKind.THREE or g.target_kind != PointKind.THREE:
        return ["point kinds"]
    exps = [_pure(p) for p in g.payloads]
    if any(e is None for e in exps):
        return ["payload shape"]
    if det3(exps) == 0:
        out.append("determinant condition")
    return out


def _check_toroidal2(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.TWO or g.target_kind != PointKind.THREE:
        return ["point kinds"]
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve is None or not _xy_only(ue) or not _xy_only(ve):
        return ["payload shape"]
    if not _xy_only(g.w.exp) or _series_is_translated_coord(g.w.series, 2) is None:
        return ["payload shape"]
    if det2([[ue[0], ue[1]], [ve[0], ve[1]]]) == 0:
        return ["determinant condition"]
    return []


def _check_toroidal3(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.ONE or g.target_kind != PointKind.THREE:
        return ["point kinds"]
    ue = _pure(g.u)
    if ue is None or not _x_only(ue) or ue[0] <= 0:
        return ["payload shape"]
    if not (_x_only(g.v.exp) and g.v.exp[0] > 0 and _series_is_translated_coord(g.v.series, 1)):
        return ["payload shape"]
    if not (_x_only(g.w.exp) and g.w.exp[0] > 0 and _series_is_translated_coord(g.w.series, 2)):
        return ["payload shape"]
    return []


def _check_toroidal4(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.TWO or g.target_kind != PointKind.TWO:
        return ["point kinds"]
    ue, ve, we = _pure(g.u), _pure(g.v), _pure(g.w)
    if ue is None or ve is None or we is None:
        return ["payload shape"]
    if not (_xy_only(ue) and _xy_only(ve) and we == (0, 0, 1)):
        return ["payload shape"]
    if det2([[ue[0], ue[1]], [ve[0], ve[1]]]) == 0:
        return ["determinant condition"]
    return []


def _check_toroidal5(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.ONE or g.target_kind != PointKind.TWO:
        return ["point kinds"]
    ue, we = _pure(g.u), _pure(g.w)
    if ue is None or not _x_only(ue) or ue[0] <= 0:
        return ["payload shape"]
    if not (_x_only(g.v.exp) and g.v.exp[0] > 0 and _series_is_translated_coord(g.v.series, 1)):
        return ["payload shape"]
    if we != (0, 0, 1):
        return ["payload shape"]
    return []


def _check_toroidal6(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.ONE or g.target_kind != PointKind.ONE:
        return ["point kinds"]
    ue, ve, we = _pure(g.u), _pure(g.v), _pure(g.w)
    if ue is None or ve is None or we is None:
        return ["payload shape"]
    if not (_x_only(ue) and ue[0] > 0 and ve == (0, 1, 0) and we == (0, 0, 1)):
        return ["payload shape"]
    return []


def _check_prep2b(g: Germ) -> list[str]:
    # u = x^a, v = x^c(gamma(x,y) + x^d z), w = y at a 1-point over a 2-point.
    if g.domain_kind != PointKind.ONE or g.target_kind != PointKind.TWO:
        return ["point kinds"]
    ue, we = _pure(g.u), _pure(g.w)
    if ue is None or not _x_only(ue) or ue[0] <= 0 or we != (0, 1, 0):
        return ["payload shape"]
    if g.v.series is None or not _x_only(g.v.exp):
        return ["payload shape"]
    zfree, zlin, higher = _split_z(g.v.series)
    if higher:
        return ["payload shape"]
    e = _single_z_term(zlin, require_no_y=True)
    if e is None:
        return ["payload shape"]
    if not zfree or zfree.get(ZERO3, Fraction(0)) == 0:
        return ["nonzero constant"]
    return []


def _check_prep2c(g: Germ) -> list[str]:
    # u = (x^a y^b)^k, v = (x^a y^b)^l (gamma(x^a y^b, z) + x^c y^d), w = z.
    if g.domain_kind != PointKind.TWO or g.target_kind != PointKind.TWO:
        return ["point kinds"]
    ue, we = _pure(g.u), _pure(g.w)
    if ue is None or we != (0, 0, 1):
        return ["payload shape"]
    prim = _primitive_direction(ue)
    if prim is None:
        return ["payload shape"]
    a, b, _ = prim
    if g.v.series is None:
        return ["payload shape"]
    ve = g.v.exp
    if ve[2] != 0 or a * ve[1] != b * ve[0] or ve[0] % a != 0 or ve[0] == 0:
        return ["payload shape"]
    inside, outside = _monomial_part_split(g.v.series.as_dict(), (a, b))
    if len(outside) != 1:
        return ["payload shape"]
    (ce, _), = outside.items()
    if ce[2] != 0:
        return ["payload shape"]
    if a * ce[1] == b * ce[0]:
        return ["determinant condition"]
    if not _is_unit_or_zero_in_xy(inside) or not inside:
        return ["nonzero constant"]
    return []


def _check_eq16(g: Germ) -> list[str]:
    out = []
    if g.domain_kind != PointKind.THREE or g.target_kind == PointKind.ONE:
        return ["point kinds"]
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve is None:
        return ["payload shape"]
    if rank_of([ue, ve]) != 2:
        return ["rank condition"]
    terms = g.w.term_exponents()
    rank3 = [t for t in terms if rank_of([ue, ve, t]) == 3]
    rank2 = [t for t in terms if rank_of([ue, ve, t]) == 2]
    if len(rank3) != 1 or len(rank2) + 1 != len(terms):
        return ["payload shape"]
    n = rank3[0]
    for m in rank2:
        if all(n[i] <= m[i] for i in range(3)):
            label = "M_0" if m == min(rank2, key=lambda t: (_deg(t), t)) else "a series term"
            out.append(f"N divides {label}")
    return out


def _check_tf1(g: Germ) -> list[str]:
    # u = x^a, v = x^b(alpha + y); w = g(x,y) + x^c z.
    if g.domain_kind != PointKind.ONE or g.target_kind == PointKind.ONE:
        return ["point kinds"]
    ue = _pure(g.u)
    if ue is None or not _x_only(ue) or ue[0] <= 0:
        return ["payload shape"]
    if not (_x_only(g.v.exp) and g.v.exp[0] > 0 and _series_is_translated_coord(g.v.series, 1)):
        return ["payload shape"]
    w = g.w.to_series()
    zfree, zlin, higher = _split_z(w)
    if higher or _single_z_term(zlin, require_no_y=True) is None:
        return ["payload shape"]
    return []


def _check_tf21(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.TWO or g.target_kind == PointKind.ONE:
        return ["point kinds"]
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve is None or not _xy_only(ue) or not _xy_only(ve):
        return ["payload shape"]
    if det2([[ue[0], ue[1]], [ve[0], ve[1]]]) == 0:
        return ["rank condition"]
    w = g.w.to_series()
    zfree, zlin, higher = _split_z(w)
    if higher or len(zlin) != 1:
        return ["payload shape"]
    return []


def _check_tf22(g: Germ) -> list[str]:
    # u = (x^a y^b)^k, v = (x^a y^b)^t(alpha + z); w = g(x^a y^b, z) + x^c y^d.
    if g.domain_kind != PointKind.TWO or g.target_kind == PointKind.ONE:
        return ["point kinds"]
    ue = _pure(g.u)
    if ue is None:
        return ["payload shape"]
    prim = _primitive_direction(ue)
    if prim is None:
        return ["payload shape"]
    a, b, _ = prim
    ve = g.v.exp
    if not (ve[2] == 0 and ve[0] > 0 and a * ve[1] == b * ve[0] and ve[0] % a == 0):
        return ["payload shape"]
    if _series_is_translated_coord(g.v.series, 2) is None:
        return ["payload shape"]
    w = g.w.to_series()
    inside, outside = _monomial_part_split(w.as_dict(), (a, b))
    if len(outside) != 1:
        return ["payload shape"]
    (ce, _), = outside.items()
    if ce[2] != 0 or a * ce[1] == b * ce[0]:
        return ["rank condition"]
    return []


def _check_tf3(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.THREE or g.target_kind == PointKind.ONE:
        return ["point kinds"]
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve is None:
        return ["payload shape"]
    if rank_of([ue, ve]) != 2:
        return ["rank condition"]
    terms = g.w.term_exponents()
    rank3 = [t for t in terms if rank_of([ue, ve, t]) == 3]
    if len(rank3) != 1:
        return ["payload shape"]
    return []


def _check_tf01(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.ONE or g.target_kind != PointKind.ONE:
        return ["point kinds"]
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve is None or not _x_only(ue) or ue[0] <= 0 or ve != (0, 1, 0):
        return ["payload shape"]
    w = g.w.to_series()
    zfree, zlin, higher = _split_z(w)
    if higher or _single_z_term(zlin, require_no_y=True) is None:
        return ["payload shape"]
    return []


def _check_tf02(g: Germ) -> list[str]:
    if g.domain_kind != PointKind.TWO or g.target_kind != PointKind.ONE:
        return ["point kinds"]
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve != (0, 0, 1):
        return ["payload shape"]
    prim = _primitive_direction(ue)
    if prim is None:
        return ["payload shape"]
    a, b, _ = prim
    w = g.w.to_series()
    inside, outside = _monomial_part_split(w.as_dict(), (a, b))
    if len(outside) != 1:
        return ["payload shape"]
    (ce, _), = outside.items()
    if ce[2] != 0 or a * ce[1] == b * ce[0]:
        return ["rank condition"]
    return []


_CHECKERS = {
    "Toroidal1": _check_toroidal1,
    "Toroidal2": _check_toroidal2,
    "Toroidal3": _check_toroidal3,
    "Toroidal4": _check_toroidal4,
    "Toroidal5": _check_toroidal5,
    "Toroidal6": _check_toroidal6,
    PREP2B: _check_prep2b,
    PREP2C: _check_prep2c,
    EQ16: _check_eq16,
    TF1: _check_tf1,
    TF21: _check_tf21,
    TF22: _check_tf22,
    TF3: _check_tf3,
    TF01: _check_tf01,
    TF02: _check_tf02,
}

# Most specific first.
_CLASSIFY_ORDER = (
    "Toroidal1", "Toroidal2", "Toroidal3", "Toroidal4", "Toroidal5", "Toroidal6",
    PREP2B, PREP2C, EQ16, TF22, TF21, TF1, TF3, TF01, TF02,
)


def classify(germ: Germ) -> str:
    """Most specific matching form tag, or Unclassified."""
    if not isinstance(germ, Germ):
        raise MalformedGerm("not a germ")
    for tag in _CLASSIFY_ORDER:
        if not _CHECKERS[tag](germ):
            return tag
    return UNCLASSIFIED


def validate(germ: Germ) -> list[str]:
    """Violations of the invariants of the germ's tagged form.  A germ
    without a declared tag is validated against its classified tag, which
    by construction yields no violations."""
    tag = germ.form_tag or classify(germ)
    if tag == UNCLASSIFIED:
        return []
    if tag not in _CHECKERS:
        return [f"unknown tag {tag}"]
    return _CHECKERS[tag](germ)


def is_monomial_form(germ: Germ) -> bool:
    """Whether u, v, w are pure monomials of full rank at a 3-point."""
    if germ.domain_kind != PointKind.THREE:
        raise MalformedGerm("monomial forms live at 3-points of the source")
    exps = [_pure(p) for p in germ.payloads]
    if any(e is None for e in exps):
        return False
    return rank_of(exps) == 3


def is_super_parameters(germ: Germ) -> bool:
    """Whether the payloads match one of the four rigid shapes available
    over a 2-point target, at the truncated level."""
    if germ.target_kind != PointKind.TWO:
        raise MalformedGerm("super-parameter shapes are defined over 2-point targets")
    fn = {
        PointKind.ONE: _super_form1,
        PointKind.TWO: _super_form23,
        PointKind.THREE: _super_form4,
    }[germ.domain_kind]
    return fn(germ)


def _super_form1(g: Germ) -> bool:
    # u = x^a, v = x^b(alpha + y), w = x^c gamma(x,y) + x^d(z + beta).
    ue = _pure(g.u)
    if ue is None or not _x_only(ue) or ue[0] <= 0:
        return False
    if not (_x_only(g.v.exp) and g.v.exp[0] > 0 and _series_is_translated_coord(g.v.series, 1)):
        return False
    w = g.w.to_series()
    zfree, zlin, higher = _split_z(w)
    if higher:
        return False
    e = _single_z_term(zlin, require_no_y=True)
    if e is None:
        return False
    d = e[0]
    # The z-free part must read as x^c gamma(x, y) + beta x^d with gamma a
    # unit or zero; beta may sit at x^d or be zero, so try both splits.
    for beta_exp in ((d, 0, 0), None):
        rest = dict(zfree)
        if beta_exp is not None:
            rest.pop(beta_exp, None)
        if not rest:
            return True
        c = min(t[0] for t in rest)
        if (c, 0, 0) in rest:
            return True
    return False


def _super_form23(g: Germ) -> bool:
    return _super_form2(g) or _super_form3(g)


def _super_form2(g: Germ) -> bool:
    # u = x^a y^b, v = x^c y^d, w = x^e y^f gamma(x,y) + x^g y^h (z + beta).
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve is None or not _xy_only(ue) or not _xy_only(ve):
        return False
    if det2([[ue[0], ue[1]], [ve[0], ve[1]]]) == 0:
        return False
    w = g.w.to_series()
    zfree, zlin, higher = _split_z(w)
    if higher:
        return False
    if len(zlin) != 1:
        return False
    (e, _), = zlin.items()
    gh = (e[0], e[1])
    rest = dict(zfree)
    rest.pop((gh[0], gh[1], 0), None)
    if _has_unit_factorization_xy(rest):
        return True
    return _has_unit_factorization_xy(dict(zfree))


def _has_unit_factorization_xy(terms: dict[Exp, Fraction]) -> bool:
    """Whether the z-free terms are zero or x^e y^f times a unit series."""
    if not terms:
        return True
    e0 = min(t[0] for t in terms)
    f0 = min(t[1] for t in terms)
    return (e0, f0, 0) in terms


def _super_form3(g: Germ) -> bool:
    # u = (x^a y^b)^k, v = (x^a y^b)^t(alpha + z),
    # w = (x^a y^b)^l gamma(x^a y^b, z) + x^c y^d.
    ue = _pure(g.u)
    if ue is None:
        return False
    prim = _primitive_direction(ue)
    if prim is None:
        return False
    a, b, _ = prim
    ve = g.v.exp
    if not (ve[2] == 0 and ve[0] > 0 and a * ve[1] == b * ve[0] and ve[0] % a == 0):
        return False
    if _series_is_translated_coord(g.v.series, 2) is None:
        return False
    w = g.w.to_series()
    inside, outside = _monomial_part_split(w.as_dict(), (a, b))
    if len(outside) != 1:
        return False
    (ce, _), = outside.items()
    if ce[2] != 0 or a * ce[1] == b * ce[0]:
        return False
    if not inside:
        return True
    # gamma must be a unit or zero: the minimal power of the bound monomial
    # must occur with z-degree 0.
    lmin = min(e[0] // a for e in inside)
    return any(e[2] == 0 and e[0] // a == lmin for e in inside)


def _super_form4(g: Germ) -> bool:
    # u, v rank-2 monomials; w = x^g y^h z^i gamma + x^j y^k z^l with
    # rank(u, v, (j,k,l)) = 3 and gamma a unit in rank-2 monomials or zero.
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve is None or rank_of([ue, ve]) != 2:
        return False
    terms = g.w.term_exponents()
    rank3 = [t for t in terms if rank_of([ue, ve, t]) == 3]
    rank2 = [t for t in terms if rank_of([ue, ve, t]) == 2]
    if len(rank3) != 1 or len(rank2) + 1 != len(terms):
        return False
    if not rank2:
        return True
    base = tuple(min(t[i] for t in rank2) for i in range(3))
    return base in rank2


# ---------------------------------------------------------------------------
# Three-point exponent germs (the tau data)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThreePointGerm:
    """Exponent-level germ at a 3-point of the source: u, v monomial
    exponents, the series terms of w, and the rank-3 monomial of w.

    The constructor checks shapes only; build through make_three_point_germ
    to enforce the full invariants.  (Chart transforms may legitimately
    break the non-divisibility of the rank-3 monomial at the exponent
    level; restoring it is an analytic renormalization, and the quotient
    data never reads it.)
    """

    u_exp: Exp
    v_exp: Exp
    series_terms: tuple[tuple[Fraction, Exp], ...]
    n_exp: Exp
    target_kind: PointKind

    def __post_init__(self):
        if self.target_kind == PointKind.ONE:
            raise MalformedGerm("target of a 3-point germ is a 2- or 3-point")
        for e in (self.u_exp, self.v_exp, self.n_exp):
            if len(e) != 3 or any(x < 0 for x in e):
                raise MalformedGerm(f"bad exponent vector {e}")

    def violations(self) -> list[str]:
        out = []
        u, v, n = self.u_exp, self.v_exp, self.n_exp
        if rank_of([u, v]) != 2:
            out.append("rank(u,v) != 2")
        if rank_of([u, v, n]) != 3:
            out.append("rank(u,v,N) != 3")
        degs = []
        for coef, m in self.series_terms:
            if coef == 0:
                out.append("zero series coefficient")
            if rank_of([u, v, m]) != 2:
                out.append(f"rank(u,v,{m}) != 2")
            if all(n[i] <= m[i] for i in range(3)):
                label = "M_0" if (sum(m), m) == min((sum(t), t) for _, t in self.series_terms) else str(m)
                out.append(f"N divides {label}")
            degs.append(sum(m))
        if degs != sorted(degs):
            out.append("series terms not sorted by degree")
        return out

    @property
    def m0(self) -> Exp | None:
        if not self.series_terms:
            return None
        return min((m for _, m in self.series_terms), key=lambda e: (sum(e), e))


def make_three_point_germ(u_exp, v_exp, series_terms, n_exp, target_kind) -> ThreePointGerm:
    """Build a ThreePointGerm with series terms sorted by (degree, exp),
    raising MalformedGerm when any invariant fails."""
    terms = tuple(sorted(((Fraction(c), tuple(m)) for c, m in series_terms),
                         key=lambda t: (sum(t[1]), t[1])))
    g = ThreePointGerm(tuple(u_exp), tuple(v_exp), terms, tuple(n_exp), target_kind)
    bad = g.violations()
    if bad:
        raise MalformedGerm("; ".join(bad))
    return g


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def _frac_to_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _frac_from_str(s) -> Fraction:
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {s!r}") from exc


def _series_to_json(s: TruncSeries) -> dict:
    return {
        "terms": [{"exp": list(e), "coef": _frac_to_str(c)} for e, c in s.terms],
        "trunc": s.trunc,
        "exact": s.exact,
    }


def _series_from_json(d: dict) -> TruncSeries:
    try:
        terms = {tuple(t["exp"]): _frac_from_str(t["coef"]) for t in d["terms"]}
        return TruncSeries.from_terms(terms, trunc=int(d["trunc"]), exact=bool(d.get("exact", True)))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad series object: {exc}") from exc


def _payload_to_json(p: Payload) -> dict:
    out: dict = {"exp": list(p.exp)}
    if p.coef != 1:
        out["coef"] = _frac_to_str(p.coef)
    if p.series is not None:
        out["series"] = _series_to_json(p.series)
    return out


def _payload_from_json(d: dict) -> Payload:
    try:
        exp = tuple(int(x) for x in d["exp"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad payload: {exc}") from exc
    coef = _frac_from_str(d.get("coef", "1"))
    series = _series_from_json(d["series"]) if "series" in d else None
    if series is not None:
        return Payload.with_series(exp, series, coef)
    return Payload(coef, exp)


def germ_to_json(g: Germ) -> dict:
    out = {
        "target_kind": g.target_kind.label,
        "domain_kind": g.domain_kind.label,
        "u": _payload_to_json(g.u),
        "v": _payload_to_json(g.v),
        "w": _payload_to_json(g.w),
    }
    if g.form_tag:
        out["form_tag"] = g.form_tag
    if g.constants:
        out["constants"] = {k: _frac_to_str(v) for k, v in sorted(g.constants.items())}
    return out


def germ_from_json(d: dict) -> Germ:
    try:
        tk = PointKind.from_label(d["target_kind"])
        dk = PointKind.from_label(d["domain_kind"])
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from exc
    consts = {k: _frac_from_str(v) for k, v in d.get("constants", {}).items()}
    return Germ(
        target_kind=tk,
        domain_kind=dk,
        u=_payload_from_json(d["u"]),
        v=_payload_from_json(d["v"]),
        w=_payload_from_json(d["w"]),
        constants=consts,
        form_tag=d.get("form_tag"),
    )


def three_point_germ_to_json(g: ThreePointGerm) -> dict:
    return {
        "kind": "three_point_germ",
        "target_kind": g.target_kind.label,
        "u_exp": list(g.u_exp),
        "v_exp": list(g.v_exp),
        "series": [{"coef": _frac_to_str(c), "exp": list(m)} for c, m in g.series_terms],
        "n_exp": list(g.n_exp),
    }


def three_point_germ_from_json(d: dict) -> ThreePointGerm:
    try:
        return make_three_point_germ(
            tuple(int(x) for x in d["u_exp"]),
            tuple(int(x) for x in d["v_exp"]),
            [(_frac_from_str(t["coef"]), tuple(int(x) for x in t["exp"])) for t in d["series"]],
            tuple(int(x) for x in d["n_exp"]),
            PointKind.from_label(d["target_kind"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad three-point germ: {exc}") from exc


def three_point_germ_from_germ(g: Germ) -> ThreePointGerm:
    """Extract the exponent-level data from an Eq16-shaped germ."""
    ue, ve = _pure(g.u), _pure(g.v)
    if ue is None or ve is None:
        raise MalformedGerm("u, v must be pure monomials")
    w = g.w.to_series()
    rank3 = []
    rank2 = []
    for e, c in w.terms:
        if rank_of([ue, ve, e]) == 3:
            rank3.append((c, e))
        else:
            rank2.append((c, e))
    if len(rank3) != 1:
        raise MalformedGerm("w must contain exactly one rank-3 monomial")
    return make_three_point_germ(ue, ve, rank2, rank3[0][1], g.target_kind)
