"""Truncated power series in three local coordinates, with exact rational
coefficients and explicit certification windows.

A TruncSeries stores finitely many terms and a window `trunc`: the stored
terms agree with the represented object through total degree `trunc`.  When
`exact` is set the stored polynomial IS the object and every derived fact is
certified.  Operations propagate windows conservatively; facts that cannot
be read off inside the window raise TruncationInsufficient instead of
guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import TruncationInsufficient

Exp = tuple[int, int, int]

ZERO3: Exp = (0, 0, 0)


def _deg(e: Exp) -> int:
    return e[0] + e[1] + e[2]


def _add_exp(a: Exp, b: Exp) -> Exp:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


@dataclass(frozen=True)
class TruncSeries:
    terms: tuple[tuple[Exp, Fraction], ...]
    trunc: int
    exact: bool = False

    def __post_init__(self):
        for e, c in self.terms:
            if len(e) != 3 or any(x < 0 for x in e):
                raise ValueError(f"bad exponent {e}")
            if c == 0:
                raise ValueError("zero coefficient stored")
            if _deg(e) > self.trunc:
                raise ValueError(f"term {e} beyond window {self.trunc}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_terms(terms: Mapping[Exp, Fraction] | Iterable[tuple[Exp, Fraction]],
                   trunc: int | None = None, exact: bool = True) -> "TruncSeries":
        items = dict(terms).items() if isinstance(terms, Mapping) else dict(terms).items()
        clean = {tuple(e): Fraction(c) for e, c in items if c != 0}
        maxdeg = max((_deg(e) for e in clean), default=0)
        if trunc is None:
            trunc = maxdeg
        dropped = [e for e in clean if _deg(e) > trunc]
        for e in dropped:
            del clean[e]
            exact = False
        return TruncSeries(tuple(sorted(clean.items())), trunc, exact)

    @staticmethod
    def zero(trunc: int = 0, exact: bool = True) -> "TruncSeries":
        return TruncSeries((), trunc, exact)

    @staticmethod
    def constant(c: Fraction | int, trunc: int = 0) -> "TruncSeries":
        c = Fraction(c)
        if c == 0:
            return TruncSeries.zero(trunc)
        return TruncSeries(((ZERO3, c),), trunc, True)

    @staticmethod
    def monomial(e: Exp, c: Fraction | int = 1, trunc: int | None = None) -> "TruncSeries":
        c = Fraction(c)
        if trunc is None:
            trunc = _deg(e)
        if c == 0:
            return TruncSeries.zero(trunc)
        return TruncSeries(((tuple(e), c),), max(trunc, _deg(e)), True)

    # -- queries -----------------------------------------------------------

    def as_dict(self) -> dict[Exp, Fraction]:
        return dict(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def constant_term(self) -> Fraction:
        for e, c in self.terms:
            if e == ZERO3:
                return c
        return Fraction(0)

    @property
    def is_unit(self) -> bool:
        """Unit-ness is read from the constant term, which is always inside
        the window."""
        return self.constant_term != 0

    @property
    def min_degree(self) -> int | None:
        if not self.terms:
            return None
        return min(_deg(e) for e, _ in self.terms)

    def ord_along(self, axis: int) -> int | None:
        """Largest k with x_axis^k dividing the series; None for exact zero.

        Certified only when the series is exact or the answer is 0: an
        inexact window cannot exclude small powers hiding beyond it.
        """
        if not self.terms:
            if self.exact:
                return None
            raise TruncationInsufficient("order of a window-zero series")
        m = min(e[axis] for e, _ in self.terms)
        if m > 0 and not self.exact:
            raise TruncationInsufficient(f"order along axis {axis} not certified")
        return m

    # -- arithmetic --------------------------------------------------------

    def _window(self) -> int | None:
        """Effective window; None means exact (infinite)."""
        return None if self.exact else self.trunc

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        wa, wb = self._window(), other._window()
        if wa is None and wb is None:
            win = None
        elif wa is None:
            win = wb
        elif wb is None:
            win = wa
        else:
            win = min(wa, wb)
        out = self.as_dict()
        for e, c in other.terms:
            s = out.get(e, Fraction(0)) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        maxdeg = max((_deg(e) for e in out), default=0)
        if win is None:
            return TruncSeries.from_terms(out, maxdeg, exact=True)
        kept = {e: c for e, c in out.items() if _deg(e) <= win}
        return TruncSeries(tuple(sorted(kept.items())), win, False)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(tuple((e, -c) for e, c in self.terms), self.trunc, self.exact)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def scale(self, c: Fraction | int) -> "TruncSeries":
        c = Fraction(c)
        if c == 0:
            return TruncSeries.zero(self.trunc, self.exact)
        return TruncSeries(tuple((e, k * c) for e, k in self.terms), self.trunc, self.exact)

    def shift(self, e: Exp) -> "TruncSeries":
        """Multiply by the monomial x^e."""
        terms = tuple((_add_exp(t, e), c) for t, c in self.terms)
        win = self.trunc + _deg(e)
        return TruncSeries(terms, win, self.exact)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        wa, wb = self._window(), other._window()
        va = self.min_degree if self.min_degree is not None else 0
        vb = other.min_degree if other.min_degree is not None else 0
        # Unknown tail of one factor times stored part of the other starts
        # at degree window + other's valuation + 1.
        cands = []
        if wa is not None:
            cands.append(wa + vb)
        if wb is not None:
            cands.append(wb + va)
        win = min(cands) if cands else None
        out: dict[Exp, Fraction] = {}
        for ea, ca in self.terms:
            for eb, cb in other.terms:
                e = _add_exp(ea, eb)
                if win is not None and _deg(e) > win:
                    continue
                s = out.get(e, Fraction(0)) + ca * cb
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        if win is None:
            maxdeg = max((_deg(e) for e in out), default=0)
            return TruncSeries(tuple(sorted(out.items())), maxdeg, True)
        return TruncSeries(tuple(sorted(out.items())), win, False)

    def power(self, n: int) -> "TruncSeries":
        if n < 0:
            raise ValueError("negative power")
        result = TruncSeries.constant(1)
        base = self
        k = n
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def diff(self, axis: int) -> "TruncSeries":
        out: dict[Exp, Fraction] = {}
        for e, c in self.terms:
            if e[axis] == 0:
                continue
            ne = list(e)
            ne[axis] -= 1
            out[tuple(ne)] = c * e[axis]
        win = self.trunc if self.exact else max(self.trunc - 1, 0)
        maxdeg = max((_deg(e) for e in out), default=0)
        if self.exact:
            win = maxdeg
        return TruncSeries(tuple(sorted(out.items())), win, self.exact)

    def truncate(self, degree: int) -> "TruncSeries":
        kept = {e: c for e, c in self.terms if _deg(e) <= degree}
        dropped = len(kept) != len(self.terms)
        win = min(self.trunc, degree)
        return TruncSeries(tuple(sorted(kept.items())), win, self.exact and not dropped)

    def substitute(self, images: tuple["TruncSeries", "TruncSeries", "TruncSeries"]) -> "TruncSeries":
        """Compose with a coordinate substitution x_i -> images[i].

        Images must be exact and vanish at the origin, so the substitution
        maps the maximal ideal into itself and the window carries over.
        """
        for img in images:
            if not img.exact:
                raise TruncationInsufficient("substitution image must be exact")
            if img.constant_term != 0:
                raise ValueError("substitution image must vanish at the origin")
        acc = TruncSeries.zero(self.trunc, exact=self.exact)
        pow_cache: list[dict[int, TruncSeries]] = [dict(), dict(), dict()]

        def img_pow(axis: int, n: int) -> TruncSeries:
            cache = pow_cache[axis]
            if n not in cache:
                cache[n] = images[axis].power(n)
            return cache[n]

        out: dict[Exp, Fraction] = {}
        win = self._window()
        for e, c in self.terms:
            term = TruncSeries.constant(c)
            for axis in range(3):
                if e[axis]:
                    term = term * img_pow(axis, e[axis])
            for te, tc in term.terms:
                if win is not None and _deg(te) > win:
                    continue
                s = out.get(te, Fraction(0)) + tc
                if s == 0:
                    out.pop(te, None)

                else:
                    out[te] = s
        if win is None:
            maxdeg = max((_deg(e) for e in out), default=0)
            return TruncSeries(tuple(sorted(out.items())), maxdeg, True)
        return TruncSeries(tuple(sorted(out.items())), win, False)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = ("x", "y", "z")
        parts = []
        for e, c in self.terms:
            factors = [str(c)] if c != 1 or e == ZERO3 else []
            for i, k in enumerate(e):
                if k == 1:
                    factors.append(names[i])
                elif k > 1:
                    factors.append(f"{names[i]}^{k}")
            parts.append("*".join(factors))
        tail = "" if self.exact else f" + O(deg {self.trunc + 1})"
        return " + ".join(parts) + tail
