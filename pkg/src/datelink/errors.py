"""Exception hierarchy shared by all datelink modules."""


class DatelinkError(Exception):
    """Base class for every error raised by this package."""


class OutOfAlphabet(DatelinkError, ValueError):
    """A field value has no representation in a head's class alphabet."""


class FormatMismatch(DatelinkError, ValueError):
    """Labels, predictions or fields disagree about the sequence format."""


class ShapeMismatch(DatelinkError, ValueError):
    pass


class NonFinite(DatelinkError, ValueError):
    pass


class ZeroProbability(DatelinkError, ValueError):
    pass


class EmptyInput(DatelinkError, ValueError):
    pass


class DegenerateBaseline(DatelinkError, ValueError):
    pass


class EmptyReadableSet(DatelinkError, ValueError):
    pass


class CheckpointError(DatelinkError):
    """Base class for checkpoint decoding failures."""


class BadMagic(CheckpointError):
    pass


class VersionMismatch(CheckpointError):
    pass


class Truncated(CheckpointError):
    pass


class ConfigMismatch(CheckpointError, ValueError):
    """A checkpoint (or initial model) is incompatible with the requested config."""


class MissingFile(DatelinkError, FileNotFoundError):
    pass


class BadCSV(DatelinkError, ValueError):
    pass


class ConfigError(DatelinkError, ValueError):
    """Raised by the CLI config loader; ``problems`` lists every offending key."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
