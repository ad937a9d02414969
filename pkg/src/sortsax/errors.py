"""Exception types raised across the engine."""


class SortsaxError(Exception):
    """Base class for every error raised by this package."""


class LengthMismatch(SortsaxError):
    """Two series (or a series and its configured length) disagree in length."""


class NonDivisibleLength(SortsaxError):
    """Segment count does not divide the series length."""


class BitsOutOfRange(SortsaxError):
    """Bits-per-segment outside the supported 1..16 range."""


class WidthMismatch(SortsaxError):
    """Key width does not equal w*b for the requested decode."""


class SegmentCountMismatch(SortsaxError):
    """Query summary and stored summary use different segment counts."""


class StorageFull(SortsaxError):
    """A configured storage capacity limit was exceeded."""


class BudgetTooSmall(SortsaxError):
    """Memory budget cannot support a two-pass sort of this input."""


class CorruptRun(SortsaxError):
    """Run file failed its header/size integrity checks."""


class EmptyInput(SortsaxError):
    """Bulk load was given no entries."""


class EmptyIndex(SortsaxError):
    """Search was issued against an index holding no entries."""


class EmptyWindowResult(SortsaxError):
    """No indexed entry has a timestamp inside the query window."""


class OutOfOrderTimestamp(SortsaxError):
    """Arrival violated the non-decreasing timestamp contract of TP/BTP."""


class InvalidProfile(SortsaxError):
    """Workload profile fails validation."""


class UnknownQueryId(SortsaxError):
    """No trace recorded under the requested query id."""
