"""Exception hierarchy.

Every error raised on purpose by the library derives from ``SftokError`` so
the CLI can turn it into a one-line message and a nonzero exit status.  Class
names double as the short error code printed by the CLI.
"""


class SftokError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# feature grid / serialization
class DimensionMismatch(SftokError, ValueError):
    pass


class NonFiniteValue(SftokError, ValueError):
    def __init__(self, index: int, value: float):
        super().__init__(f"non-finite value {value!r} at flat index {index}")
        self.index = index
        self.value = value


class BadMagic(SftokError, ValueError):
    pass


class UnsupportedVersion(SftokError, ValueError):
    pass


class TruncatedPayload(SftokError, ValueError):
    pass


class IoFailure(SftokError, OSError):
    pass


# sampling
class ZeroCount(SftokError, ValueError):
    pass


class EmptyVideo(SftokError, ValueError):
    pass


class DecodeFailure(SftokError, ValueError):
    pass


# pooling
class NonDivisibleStride(SftokError, ValueError):
    def __init__(self, axis: str, size: int, stride: int):
        super().__init__(
            f"stride {stride} does not divide {axis} size {size} (remainder {size % stride})"
        )
        self.axis = axis
        self.remainder = size % stride


class TargetExceedsInput(SftokError, ValueError):
    pass


# config / aggregation / budget
class InvalidConfig(SftokError, ValueError):
    pass


class InvalidSpec(SftokError, ValueError):
    pass


# encoder
class BadFrameSize(SftokError, ValueError):
    pass


class NonDivisiblePatch(SftokError, ValueError):
    pass


class FrameCountMismatch(SftokError, ValueError):
    pass


# prompting
class InvalidPrompt(SftokError, ValueError):
    pass


class MissingOptions(InvalidPrompt):
    pass


class UnexpectedOptions(InvalidPrompt):
    pass


class Unparseable(SftokError, ValueError):
    pass


class OutOfRange(SftokError, ValueError):
    pass
