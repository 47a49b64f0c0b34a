"""Exception hierarchy shared by all torcalc modules."""


class TorcalcError(Exception):
    """Base class for all torcalc errors."""


class MalformedGerm(TorcalcError):
    """Germ payload shapes are inconsistent with the declared structure."""


class NotASublattice(TorcalcError):
    """A generator lies outside the integer span of the ambient lattice."""


class NonUnimodular(TorcalcError):
    """A substitution matrix is not unimodular (or has negative entries)."""


class TruncationInsufficient(TorcalcError):
    """A requested fact is not certified by the stored truncation window."""


class InvalidCenterForm(TorcalcError):
    """A blow-up center does not match the local equations it claims."""


class NotAFace(TorcalcError):
    """The given ray pair is not a 2-dimensional face of the fan."""


class NotACone(TorcalcError):
    """The given ray triple is not a maximal cone of the fan."""


class StepBudgetExceeded(TorcalcError):
    """A descent loop ran past its step budget; termination is proven, so
    hitting this signals a bug in the caller's data or in the descent."""


class ParseError(TorcalcError):
    """Malformed JSON input on an external interface."""
