"""Layered wavelet video codec with adaptive compressed-sensing measurement."""

from .bitstream import (
    DecodedVideo,
    StreamHeader,
    decode_stream,
    describe_stream,
    encode_video,
    extract_layers,
    parse_stream,
)
from .coding import (
    CodedChunk,
    ContextModeler,
    abc_decode,
    abc_encode,
    decode_chunk,
    dequantize,
    encode_chunk,
    grc_decode,
    grc_encode,
    quantize,
    rle_zero,
    select_mode,
    unrle_zero,
)
from .dwt import (
    dwt2d_forward,
    dwt2d_inverse,
    dwt3d_forward,
    dwt3d_inverse,
    haar_temporal_forward,
    haar_temporal_inverse,
)
from .errors import (
    BitstreamError,
    CodebookError,
    CodecError,
    DimensionError,
    FormatError,
    NumericError,
    StructureError,
    TruncatedInputError,
    UnusableStreamError,
)
from .geometry import Band, SubbandPyramid, band_layout, bands_for_layer, record_bands
from .metrics import complexity_report, emit_curves, nmse, psnr, rate_report
from .recovery import (
    AmpRecovery,
    EampRecovery,
    IhtRecovery,
    IstRecovery,
    RecoveryConfig,
    RecoveryResult,
    make_solver,
    recover_pyramid,
    recover_record,
)
from .sensing import (
    DEFAULT_MASTER_SEED,
    DEFAULT_TARGET_MIN_N,
    MeasurementRecord,
    SensingCodebook,
    hard_threshold,
    measure,
    select_entry,
    sense_pyramid,
    vectorize_band,
)
from .video_io import partition_gofs, read_raw_video, write_raw_video

__version__ = "0.1.0"

__all__ = [
    "AmpRecovery",
    "Band",
    "BitstreamError",
    "CodebookError",
    "CodecError",
    "CodedChunk",
    "ContextModeler",
    "DecodedVideo",
    "DEFAULT_MASTER_SEED",
    "DEFAULT_TARGET_MIN_N",
    "DimensionError",
    "EampRecovery",
    "FormatError",
    "IhtRecovery",
    "IstRecovery",
    "MeasurementRecord",
    "NumericError",
    "RecoveryConfig",
    "RecoveryResult",
    "SensingCodebook",
    "StreamHeader",
    "StructureError",
    "SubbandPyramid",
    "TruncatedInputError",
    "UnusableStreamError",
    "abc_decode",
    "abc_encode",
    "band_layout",
    "bands_for_layer",
    "complexity_report",
    "decode_chunk",
    "decode_stream",
    "dequantize",
    "describe_stream",
    "dwt2d_forward",
    "dwt2d_inverse",
    "dwt3d_forward",
    "dwt3d_inverse",
    "emit_curves",
    "encode_chunk",
    "encode_video",
    "extract_layers",
    "grc_decode",
    "grc_encode",
    "haar_temporal_forward",
    "haar_temporal_inverse",
    "hard_threshold",
    "make_solver",
    "measure",
    "nmse",
    "parse_stream",
    "partition_gofs",
    "psnr",
    "quantize",
    "rate_report",
    "read_raw_video",
    "record_bands",
    "recover_pyramid",
    "recover_record",
    "rle_zero",
    "select_entry",
    "select_mode",
    "sense_pyramid",
    "unrle_zero",
    "vectorize_band",
    "write_raw_video",
]
