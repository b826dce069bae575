"""Exception hierarchy shared across the package."""


class OTMarketError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(OTMarketError):
    """Input arrays disagree on a declared dimension."""


class ShapeMismatch(OTMarketError):
    """An operand's shape does not match the model it is applied to."""


class NonPositiveWeight(OTMarketError):
    """A point mass is zero or negative."""


class WeightSumOff(OTMarketError):
    """Point masses do not sum to one within tolerance."""


class NonFiniteEntry(OTMarketError):
    """A matrix or vector contains NaN or infinity."""


class IndexOutOfRange(OTMarketError):
    """A point or alternative index is outside the model."""


class PricesOutsideK(OTMarketError):
    """An inequality dual is negative."""


class NonFiniteEncountered(OTMarketError):
    """The descent produced a non-finite value or direction."""


class NumericalBreakdown(OTMarketError):
    """Every candidate pivot is below the admissible magnitude."""


class TooLarge(OTMarketError):
    """The instance exceeds the configured variable cap."""


class RecoveryFailed(OTMarketError):
    """No tolerance in the schedule yielded a feasible support."""


class MarginalMismatch(OTMarketError):
    """A coupling's type marginal disagrees with the point masses."""


class TooManyGoods(OTMarketError):
    """Bundle enumeration would exceed the column cap."""


class LevelOutOfRange(OTMarketError):
    """A dyadic level is outside the supported range."""


class SizeOutOfRange(OTMarketError):
    """A generator size parameter is outside its legal range."""


class SupplyOutOfRange(OTMarketError):
    """A good's supply is not strictly between zero and one."""


class UsageError(OTMarketError):
    """The command line was malformed."""
