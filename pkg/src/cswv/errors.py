"""Exception types shared across the codec."""


class CodecError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(CodecError, ValueError):
    """Frame or array geometry violates a structural requirement."""


class TruncatedInputError(CodecError, ValueError):
    """Raw input ended before the declared sample count.

    ``byte_offset`` is the position where reading had to stop.
    """

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class StructureError(CodecError, ValueError):
    """Sub-band layout or plane set is inconsistent with the fixed 3+3-level scheme."""


class CodebookError(CodecError, ValueError):
    """Measurement codebook cannot serve the request (e.g. more rows than samples)."""


class NumericError(CodecError, ValueError):
    """Non-finite values where finite reals are required."""


class BitstreamError(CodecError, ValueError):
    """Serialized data is malformed or ends early.

    ``bit_offset`` locates the failure inside the current buffer when known.
    """

    def __init__(self, message: str, bit_offset: int | None = None):
        if bit_offset is not None:
            message = f"{message} (bit offset {bit_offset})"
        super().__init__(message)
        self.bit_offset = bit_offset


class FormatError(CodecError, ValueError):
    """Stream does not start with the expected magic/version."""


class UnusableStreamError(CodecError, ValueError):
    """Stream parses but cannot be decoded (missing base layer, non-prefix layers)."""
