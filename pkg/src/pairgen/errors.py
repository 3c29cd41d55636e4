"""Exception hierarchy shared by all pairgen modules."""


class PairgenError(Exception):
    """Base class for every error raised by pairgen."""


class DomainError(PairgenError, ValueError):
    """Input outside the range where a model is defined."""


class EvanescentError(DomainError):
    """Propagation would be evanescent (total reflection); not supported."""


class InfiniteCoherence(PairgenError):
    """Raised when a phase mismatch is exactly zero, so no finite coherence length exists."""


class NoPolingNeeded(PairgenError):
    """The process is already phase matched; no poling period exists."""


class PerturbativeValidityError(PairgenError):
    """A surface factor left the range where first-order theory can be trusted."""


class PerturbativeValidityWarning(UserWarning):
    pass


class ConfigError(PairgenError):
    """Scenario configuration could not be read or failed validation.

    ``problems`` holds every violation found, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
