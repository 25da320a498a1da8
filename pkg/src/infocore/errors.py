"""Exception types shared across the package."""


class RecsysError(Exception):
    """Base class for package-specific errors."""


class EmptyDatasetError(RecsysError):
    """An interaction source contains no usable links."""


class EmptyProfileError(RecsysError):
    """A scoring target has no training links.

    Callers decide whether to skip the user or fall back; a silent
    all-zero score vector would be indistinguishable from a real one.
    """


class NoEligibleUsersError(RecsysError):
    """A degree filter left no users to sample from."""


class NoEvaluableUsersError(RecsysError):
    """An evaluation run found no user with both training and probe links."""
