"""Exception hierarchy shared by all modules."""


class UrysohnError(Exception):
    """Base class for every error raised by this package."""


class BudgetExceeded(UrysohnError):
    """A configurable search or enumeration cap was hit before completion.

    This is never a verdict: the question being asked is left undecided.
    """

    def __init__(self, message, explored=None):
        super().__init__(message)
        self.explored = explored


class NoCover(UrysohnError):
    pass


class NotUniversalSpectrum(UrysohnError):
    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class InconsistentProfile(UrysohnError):
    pass


class NotAJump(UrysohnError):
    pass


class CommonPartDisagrees(UrysohnError):
    def __init__(self, x, y, d_a, d_b):
        super().__init__(f"common part disagrees on ({x!r}, {y!r}): {d_a} vs {d_b}")
        self.x, self.y, self.d_a, self.d_b = x, y, d_a, d_b


class Unamalgamable(UrysohnError):
    """Exhaustive search proved that no completion with distances in S exists."""

    def __init__(self, message, explored=None):
        super().__init__(message)
        self.explored = explored


class HypothesisViolated(UrysohnError):
    pass


class EmptyCommonPart(UrysohnError):
    pass


class NotMetric(UrysohnError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class DegenerateSpider(UrysohnError):
    pass


class CentreDegreeMismatch(UrysohnError):
    pass


class HeftTooSmall(UrysohnError):
    pass


class NotMetrizable(UrysohnError):
    pass


class NoQualifyingParameters(UrysohnError):
    pass


class InvariantBroken(UrysohnError):
    def __init__(self, message, transcript=None):
        super().__init__(message)
        self.transcript = transcript


class StrategyRefused(UrysohnError):
    """The spectrum has infinite distinguishing number; no 2-coloring is built."""


class ClassTooSmall(UrysohnError):
    pass


class DensityUnmet(UrysohnError):
    pass


class TruncationTooShallow(UrysohnError):
    pass


class NoSuitableClass(UrysohnError):
    pass
