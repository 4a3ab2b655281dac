"""Exception hierarchy shared by the library and the CLI."""


class FastHCSError(Exception):
    """Base class for all errors raised by this package."""


class InputError(FastHCSError, ValueError):
    """Malformed or non-finite input data."""


class DegenerateInputError(InputError):
    """Data without any spread (e.g. all rows identical)."""


class ConfigurationError(FastHCSError, ValueError):
    """Parameter combination that cannot be run."""


class SubsetTooSmallError(FastHCSError, ValueError):
    """Fitting subset has fewer than q + 1 members."""


class DegenerateSubsetError(FastHCSError):
    """A starting subset or sampled hyperplane is rank deficient."""


class DegenerateModelError(FastHCSError):
    """A fitted model has a zero eigenvalue where a positive one is required."""


class GenerationError(FastHCSError, ValueError):
    """A simulation cell cannot be generated as requested."""
