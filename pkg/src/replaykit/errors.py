"""Exception hierarchy shared by every replaykit module."""


class ReplayKitError(Exception):
    """Base class for all replaykit errors."""


class VcdError(ReplayKitError):
    pass


class SpecError(ReplayKitError):
    pass


class EncodeError(ReplayKitError):
    pass


class PeriodError(EncodeError):
    """Clock period is not constant across the capture."""

    def __init__(self, index, expected, observed):
        self.index = index
        self.expected = expected
        self.observed = observed
        super().__init__(
            f"clock period changes at edge {index}: "
            f"expected {expected} ticks, observed {observed} ticks"
        )


class ArtifactFormatError(ReplayKitError):
    pass


class EngineError(ReplayKitError):
    pass


class BuildError(ReplayKitError):
    """Testbench could not be assembled (port/directory mismatch etc)."""


class GoldenError(ReplayKitError):
    pass


class RomGenError(ReplayKitError):
    pass
