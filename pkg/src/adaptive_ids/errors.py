"""Exception hierarchy shared by every module in the package."""


class IdsError(Exception):
    """Base class for all errors raised by adaptive_ids."""


# -- frames / pcap -----------------------------------------------------------

class DecodeError(IdsError):
    pass


class TruncatedFrame(DecodeError):
    pass


class BadIpHeader(DecodeError):
    pass


class PcapError(IdsError):
    pass


class BadMagic(PcapError):
    pass


class TruncatedRecord(PcapError):
    pass


class IoFailure(IdsError):
    pass


# -- rules -------------------------------------------------------------------

class RuleError(IdsError):
    pass


class RuleSyntaxError(RuleError):
    """Malformed rule text. ``column`` is 1-based; ``line`` is set by the ruleset parser."""

    def __init__(self, message, column=None, line=None):
        self.message = message
        self.column = column
        self.line = line
        super().__init__(self._render())

    def _render(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.column is not None:
            where.append(f"column {self.column}")
        return f"{self.message} ({', '.join(where)})" if where else self.message

    def with_line(self, line):
        return RuleSyntaxError(self.message, self.column, line)


class MissingSid(RuleError):
    pass


class DuplicateSid(RuleError):
    pass


# -- data / models -----------------------------------------------------------

class DataError(IdsError):
    pass


class EmptyWindow(DataError):
    pass


class ColumnCountMismatch(DataError):
    def __init__(self, row, expected, got):
        self.row, self.expected, self.got = row, expected, got
        super().__init__(f"row {row}: expected {expected} columns, got {got}")


class UnparsableNumber(DataError):
    def __init__(self, row, column, text):
        self.row, self.column, self.text = row, column, text
        super().__init__(f"row {row}, column {column}: cannot parse {text!r} as a number")


class EmptyFile(DataError):
    pass


class EmptyDataset(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class TooFewSamples(DataError):
    pass


class SingleClass(DataError):
    pass


class NonFiniteFeature(DataError):
    pass


class ModelFormatError(IdsError):
    """Model/config file is unreadable, has an unknown version, or the wrong kind."""


# -- fuzzy / firefly ---------------------------------------------------------

class MissingInput(IdsError):
    pass


class NonFinite(IdsError):
    pass


# -- metrics -----------------------------------------------------------------

class MetricsError(IdsError):
    pass


class LengthMismatch(MetricsError):
    pass


class EmptyInput(MetricsError):
    pass


class UndefinedRate(MetricsError):
    """A rate whose denominator is zero. ``which`` names the empty class ("P" or "N")."""

    def __init__(self, which, message=None):
        self.which = which
        super().__init__(message or f"rate undefined: {which} == 0")


# -- pipeline / generator ----------------------------------------------------

class ArtifactLoadError(IdsError):
    pass


class TruthGap(IdsError):
    def __init__(self, windows):
        self.windows = list(windows)
        preview = ", ".join(f"{s}:{k}" for s, k in self.windows[:5])
        more = "" if len(self.windows) <= 5 else f" (+{len(self.windows) - 5} more)"
        super().__init__(f"no ground truth for {len(self.windows)} window(s): {preview}{more}")


class InvalidSpec(IdsError):
    pass
