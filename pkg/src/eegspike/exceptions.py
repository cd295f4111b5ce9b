"""Exception hierarchy shared by every stage of the detector."""


class EEGSpikeError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(EEGSpikeError, ValueError):
    """A file does not follow its documented layout.

    ``line`` is the 1-based line number for text formats and ``offset`` the
    byte offset for binary payloads; either may be ``None``.
    """

    def __init__(self, message, *, path=None, line=None, offset=None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class IntegrityError(EEGSpikeError, ValueError):
    """Recording data is internally inconsistent (e.g. ragged channels)."""


class RangeError(EEGSpikeError, ValueError):
    """A value lies outside its admissible range."""


class ConfigError(EEGSpikeError, ValueError):
    """Invalid configuration, rulebase or synthetic spec."""


class ScaleError(EEGSpikeError, ValueError):
    """A wavelet scale yields a kernel that does not fit the analysis window."""


class InputError(EEGSpikeError, ValueError):
    """Signal input too short or otherwise unusable for the requested op."""


class DegenerateEventError(EEGSpikeError, ValueError):
    """A candidate waveform cannot be split into two half-waves."""


class LabelError(EEGSpikeError, ValueError):
    """Channel labels of two inputs do not share a label space."""


class UndefinedRateError(EEGSpikeError, ZeroDivisionError):
    """Sensitivity or specificity requested with a zero denominator."""


class PreconditionError(EEGSpikeError, ValueError):
    """Input violates a documented ordering or shape precondition."""
