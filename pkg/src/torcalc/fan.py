"""Smooth simplicial fans in a rank-3 lattice with torus-invariant divisors.

A fan stores primitive integer rays and maximal cones as ray-index triples;
every maximal cone is unimodular (ray matrix of determinant +-1).  2-cones
are derived as ray pairs appearing as faces of maximal cones; each is a face
of one or two maximal cones (the ambient chart continues past a single-cone
fan, so one-sided 2-cones are still usable as centers).  Star subdivisions
insert the primitive sum of a face's rays; divisors live as coefficient
tuples parallel to the ray list and pull back by evaluating their piecewise
linear function on the new ray, i.e. by summing the face coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotACone, NotAFace, ParseError
from .lattice import content, det3

Ray = tuple[int, int, int]
Cone = tuple[int, int, int]
Divisor = tuple[int, ...]


@dataclass(frozen=True)
class SmoothFan:
    rays: tuple[Ray, ...]
    max_cones: tuple[Cone, ...]

    def __post_init__(self):
        seen = set()
        for r in self.rays:
            if len(r) != 3 or all(x == 0 for x in r):
                raise ParseError(f"bad ray {r}")
            if content(r) != 1:
                raise ParseError(f"ray {r} is not primitive")
            if r in seen:
                raise ParseError(f"duplicate ray {r}")
            seen.add(r)
        for cone in self.max_cones:
            if len(set(cone)) != 3 or any(not 0 <= i < len(self.rays) for i in cone):
                raise ParseError(f"bad cone {cone}")

    def cone_matrix(self, cone: Cone) -> tuple[Ray, Ray, Ray]:
        return tuple(self.rays[i] for i in cone)

    def is_smooth(self) -> bool:
        return all(abs(det3(self.cone_matrix(c))) == 1 for c in self.max_cones)

    def two_cones(self) -> dict[tuple[int, int], list[Cone]]:
        """Ray-index pairs that are faces of maximal cones, with their
        incident cones (one or two)."""
        faces: dict[tuple[int, int], list[Cone]] = {}
        for cone in self.max_cones:
            s = sorted(cone)
            for pair in ((s[0], s[1]), (s[0], s[2]), (s[1], s[2])):
                faces.setdefault(pair, []).append(cone)
        return faces

    def validate(self) -> list[str]:
        """Smoothness and local fan checks; empty when consistent."""
        out = []
        if not self.is_smooth():
            out.append("non-unimodular cone")
        for pair, cones in self.two_cones().items():
            if len(cones) > 2:
                out.append(f"2-cone {pair} in {len(cones)} maximal cones")
            if len(cones) == 2:
                # The two remaining rays must lie strictly on opposite
                # sides of the face's plane.
                r1, r2 = self.rays[pair[0]], self.rays[pair[1]]
                others = []
                for cone in cones:
                    (extra,) = [i for i in cone if i not in pair]
                    others.append(self.rays[extra])
                s1 = det3((r1, r2, others[0]))
                s2 = det3((r1, r2, others[1]))
                if s1 * s2 >= 0:
                    out.append(f"cones on the same side of 2-cone {pair}")
        for i, cone in enumerate(self.max_cones):
            bary = tuple(sum(self.rays[j][k] for j in cone) for k in range(3))
            for other in self.max_cones[i + 1:]:
                if self.contains(other, bary):
                    out.append(f"interior of {cone} meets {other}")
        return out

    def contains(self, cone: Cone, point: Sequence[Fraction | int]) -> bool:
        """Exact membership in a unimodular cone via its inverse matrix."""
        m = self.cone_matrix(cone)
        d = det3(m)
        coords = _solve3(m, point)
        return all(c >= 0 for c in coords) if d != 0 else False

    def support_contains(self, point: Sequence[Fraction | int]) -> bool:
        return any(self.contains(c, point) for c in self.max_cones)


def _solve3(m: tuple[Ray, Ray, Ray], p: Sequence[Fraction | int]) -> tuple[Fraction, Fraction, Fraction]:
    """Coordinates of p in the basis given by the rows of m (Cramer)."""
    d = det3(m)
    if d == 0:
        raise NotACone("degenerate cone")
    out = []
    for i in range(3):
        cols = [list(m[0]), list(m[1]), list(m[2])]
        cols[i] = [int(x) if isinstance(x, int) else x for x in p]
        out.append(Fraction(det3(cols), d))
    return tuple(out)


def octant() -> SmoothFan:
    return SmoothFan(((1, 0, 0), (0, 1, 0), (0, 0, 1)), ((0, 1, 2),))


def _ray_sum(rays: Iterable[Ray]) -> Ray:
    out = (0, 0, 0)
    for r in rays:
        out = tuple(a + b for a, b in zip(out, r))
    return out


def star_subdivide_2cone(fan: SmoothFan, pair: tuple[int, int],
                         divisors: Sequence[Divisor] = ()) -> tuple[SmoothFan, list[Divisor]]:
    """Insert the sum of the face's two rays; each incident maximal cone
    splits in two.  Divisor pullbacks get the sum of the face coefficients
    on the new ray."""
    pair = tuple(sorted(pair))
    faces = fan.two_cones()
    if pair not in faces:
        raise NotAFace(f"{pair} is not a 2-cone")
    new_ray = _ray_sum(fan.rays[i] for i in pair)
    # Primitivity is automatic for a face of a smooth cone.
    rays = fan.rays + (new_ray,)
    new_idx = len(fan.rays)
    cones: list[Cone] = []
    for cone in fan.max_cones:
        if pair[0] in cone and pair[1] in cone:
            (extra,) = [i for i in cone if i not in pair]
            cones.append(tuple(sorted((pair[0], new_idx, extra))))
            cones.append(tuple(sorted((new_idx, pair[1], extra))))
        else:
            cones.append(cone)
    new_fan = SmoothFan(rays, tuple(cones))
    pulled = [d + (d[pair[0]] + d[pair[1]],) for d in divisors]
    return new_fan, pulled


def star_subdivide_3cone(fan: SmoothFan, cone: Cone,
                         divisors: Sequence[Divisor] = ()) -> tuple[SmoothFan, list[Divisor]]:
    """Insert the sum of the cone's three rays; the cone splits in three."""
    cone = tuple(sorted(cone))
    if cone not in {tuple(sorted(c)) for c in fan.max_cones}:
        raise NotACone(f"{cone} is not a maximal cone")
    new_ray = _ray_sum(fan.rays[i] for i in cone)
    rays = fan.rays + (new_ray,)
    new_idx = len(fan.rays)
    cones: list[Cone] = []
    for c in fan.max_cones:
        if tuple(sorted(c)) == cone:
            a, b, cc = cone
            cones.extend((
                tuple(sorted((new_idx, b, cc))),
                tuple(sorted((a, new_idx, cc))),
                tuple(sorted((a, b, new_idx))),
            ))
        else:
            cones.append(c)
    new_fan = SmoothFan(rays, tuple(cones))
    pulled = [d + (d[cone[0]] + d[cone[1]] + d[cone[2]],) for d in divisors]
    return new_fan, pulled


def chart_exponents(fan: SmoothFan, divisor: Divisor, cone: Cone) -> tuple[int, int, int]:
    """Local equation exponents of a divisor in the chart of a maximal
    cone: its coefficients on the cone's rays, in cone order."""
    if tuple(sorted(cone)) not in {tuple(sorted(c)) for c in fan.max_cones}:
        raise NotACone(f"{cone} is not a maximal cone")
    return tuple(divisor[i] for i in cone)


def fan_to_json(fan: SmoothFan, divisors: Sequence[Divisor] = ()) -> dict:
    return {
        "rays": [list(r) for r in fan.rays],
        "cones": [list(c) for c in fan.max_cones],
        "divisors": [{"coeffs": list(d)} for d in divisors],
    }


def fan_from_json(d: dict) -> tuple[SmoothFan, list[Divisor]]:
    try:
        fan = SmoothFan(tuple(tuple(int(x) for x in r) for r in d["rays"]),
                        tuple(tuple(int(i) for i in c) for c in d["cones"]))
        divisors = [tuple(int(x) for x in dv["coeffs"]) for dv in d.get("divisors", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad fan object: {exc}") from exc
    for dv in divisors:
        if len(dv) != len(fan.rays):
            raise ParseError("divisor coefficients must cover every ray")
        if any(x < 0 for x in dv):
            raise ParseError("divisor coefficients must be nonnegative")
    return fan, divisors
