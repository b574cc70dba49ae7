"""Quantization and entropy coding for measurement and base-band chunks.

A chunk is one array of real samples that travels as:

    quantize -> (optional zero-run tokens) -> Golomb-Rice or adjusted binary

Signed codes map to nonnegative symbols by zigzag (0,-1,1,-2,... -> 0,1,2,3).
Golomb-Rice writes ``u >> r`` ones, a terminating zero, then the low r bits
MSB-first.  Adjusted binary is truncated binary over a known bound: with
b = ceil(log2 bound) and t = 2**b - bound, symbols below t use b-1 bits,
the rest are offset by t and use b bits.

The chunk encoder tries both coders (best Rice parameter in [0, 15] vs the
tight bound) and both run-length settings, keeping whichever payload is
smallest; ties prefer Golomb-Rice and the un-tokenized stream.  When zero
runs are tokenized, literal symbols shift up by one and symbol 0 announces a
run, followed by (run length - 4) as an ordinary symbol.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import BitstreamError, NumericError

MIN_RUN = 4
MAX_RICE_PARAM = 15
MIN_QUANT_BITS = 4
MAX_QUANT_BITS = 16


class BitWriter:
    """Append-only bit buffer; bits pack into bytes most-significant first."""

    def __init__(self):
        self._bytes = bytearray()
        self._acc = 0
        self._fill = 0

    def __len__(self) -> int:
        return len(self._bytes) * 8 + self._fill

    def write_bit(self, bit: int) -> None:
        self._acc = (self._acc << 1) | (bit & 1)
        self._fill += 1
        if self._fill == 8:
            self._bytes.append(self._acc)
            self._acc = 0
            self._fill = 0

    def write_bits(self, value: int, count: int) -> None:
        if value < 0 or (count < 64 and value >> count):
            raise ValueError(f"value {value} does not fit in {count} bits")
        for shift in range(count - 1, -1, -1):
            self.write_bit((value >> shift) & 1)

    def write_unary(self, q: int) -> None:
        for _ in range(q):
            self.write_bit(1)
        self.write_bit(0)

    def write_varint(self, value: int) -> None:
        if value < 0:
            raise ValueError("varint is unsigned")
        while True:
            group = value & 0x7F
            value >>= 7
            self.write_bits((0x80 | group) if value else group, 8)
            if not value:
                break

    def write_f32(self, value: float) -> None:
        for byte in struct.pack("<f", value):
            self.write_bits(byte, 8)

    def getvalue(self) -> bytes:
        """Finished buffer, zero-padded to a whole byte."""
        out = bytearray(self._bytes)
        if self._fill:
            out.append(self._acc << (8 - self._fill))
        return bytes(out)

    def to01(self) -> str:
        return "".join(
            f"{b:08b}" for b in self._bytes
        ) + (f"{self._acc:0{self._fill}b}" if self._fill else "")


class BitReader:
    """Bounded bit cursor over bytes; overruns raise with the failing offset."""

    def __init__(self, data: bytes, bit_length: int | None = None):
        self._data = data
        self._limit = len(data) * 8 if bit_length is None else bit_length
        self.position = 0

    @property
    def remaining(self) -> int:
        return self._limit - self.position

    def read_bit(self) -> int:
        if self.position >= self._limit:
            raise BitstreamError("bit buffer exhausted", bit_offset=self.position)
        byte = self._data[self.position >> 3]
        bit = (byte >> (7 - (self.position & 7))) & 1
        self.position += 1
        return bit

    def read_bits(self, count: int) -> int:
        value = 0
        for _ in range(count):
            value = (value << 1) | self.read_bit()
        return value

    def read_unary(self) -> int:
        q = 0
        while self.read_bit():
            q += 1
        return q

    def read_varint(self) -> int:
        value = 0
        shift = 0
        while True:
            group = self.read_bits(8)
            value |= (group & 0x7F) << shift
            if not group & 0x80:
                return value
            shift += 7
            if shift > 35:
                raise BitstreamError("varint too long", bit_offset=self.position)

    def read_f32(self) -> float:
        raw = bytes(self.read_bits(8) for _ in range(4))
        return struct.unpack("<f", raw)[0]


def zigzag(code: int) -> int:
    return 2 * code if code >= 0 else -2 * code - 1


def unzigzag(u: int) -> int:
    return u // 2 if u % 2 == 0 else -(u + 1) // 2


def quantize(
    values: np.ndarray, bits: int, max_abs: float | None = None
) -> tuple[np.ndarray, float]:
    """Symmetric mid-tread quantizer; returns (codes, max_abs).

    ``scale = (2**(bits-1) - 1) / max_abs``; an all-zero input keeps scale 1.
    """
    if not MIN_QUANT_BITS <= bits <= MAX_QUANT_BITS:
        raise ValueError(f"bits must lie in [{MIN_QUANT_BITS}, {MAX_QUANT_BITS}]")
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise NumericError("cannot quantize non-finite values")
    if max_abs is None:
        max_abs = float(np.max(np.abs(values))) if values.size else 0.0
    scale = 1.0 if max_abs == 0.0 else (2 ** (bits - 1) - 1) / max_abs
    codes = np.rint(values * scale).astype(np.int64)
    return codes, max_abs


def dequantize(codes: np.ndarray, max_abs: float, bits: int) -> np.ndarray:
    """Exact inverse mapping onto the quantizer grid."""
    codes = np.asarray(codes, dtype=np.float64)
    if max_abs == 0.0:
        return np.zeros_like(codes)
    return codes * (max_abs / (2 ** (bits - 1) - 1))


def _rice_write(writer: BitWriter, u: int, r: int) -> None:
    writer.write_unary(u >> r)
    if r:
        writer.write_bits(u & ((1 << r) - 1), r)


def _rice_read(reader: BitReader, r: int) -> int:
    q = reader.read_unary()
    return (q << r) | (reader.read_bits(r) if r else 0)


def grc_encode(codes, rice_param: int) -> str:
    """Golomb-Rice bits for signed codes (zigzag applied here)."""
    if not 0 <= rice_param <= MAX_RICE_PARAM:
        raise ValueError(f"rice parameter must lie in [0, {MAX_RICE_PARAM}]")
    writer = BitWriter()
    for c in codes:
        _rice_write(writer, zigzag(int(c)), rice_param)
    return writer.to01()


def grc_decode(bits: str, rice_param: int, count: int) -> list[int]:
    """Exact inverse of :func:`grc_encode`; truncation raises BitstreamError."""
    reader = BitReader(_pack01(bits), bit_length=len(bits))
    return [unzigzag(_rice_read(reader, rice_param)) for _ in range(count)]


def _abc_params(bound: int) -> tuple[int, int]:
    if bound < 1:
        raise ValueError(f"bound must be positive, got {bound}")
    b = max(0, math.ceil(math.log2(bound))) if bound > 1 else 0
    return b, (1 << b) - bound


def _abc_write(writer: BitWriter, u: int, bound: int) -> None:
    b, t = _abc_params(bound)
    if u < t:
        if b > 1:
            writer.write_bits(u, b - 1)
    elif b:
        writer.write_bits(u + t, b)


def _abc_read(reader: BitReader, bound: int) -> int:
    b, t = _abc_params(bound)
    if b == 0:
        return 0
    v = reader.read_bits(b - 1)
    if v < t:
        return v
    return ((v << 1) | reader.read_bit()) - t


def abc_encode(codes, bound: int) -> str:
    """Adjusted (truncated) binary bits; every zigzagged code must be < bound."""
    writer = BitWriter()
    for c in codes:
        u = zigzag(int(c))
        if u >= bound:
            raise ValueError(f"code {c} zigzags to {u}, outside bound {bound}")
        _abc_write(writer, u, bound)
    return writer.to01()


def abc_decode(bits: str, bound: int, count: int) -> list[int]:
    reader = BitReader(_pack01(bits), bit_length=len(bits))
    return [unzigzag(_abc_read(reader, bound)) for _ in range(count)]


def _pack01(bits: str) -> bytes:
    writer = BitWriter()
    for ch in bits:
        writer.write_bit(ch == "1")
    return writer.getvalue()


@dataclass(frozen=True)
class ZeroRun:
    length: int


def rle_zero(codes) -> list:
    """Replace zero runs of length >= 4 with :class:`ZeroRun` tokens."""
    tokens: list = []
    run = 0
    for c in codes:
        c = int(c)
        if c == 0:
            run += 1
            continue
        _flush_run(tokens, run)
        run = 0
        tokens.append(c)
    _flush_run(tokens, run)
    return tokens


def _flush_run(tokens: list, run: int) -> None:
    if run >= MIN_RUN:
        tokens.append(ZeroRun(run))
    else:
        tokens.extend([0] * run)


def unrle_zero(tokens) -> np.ndarray:
    """Exact inverse of :func:`rle_zero`."""
    out: list[int] = []
    for token in tokens:
        if isinstance(token, ZeroRun):
            if token.length < MIN_RUN:
                raise BitstreamError(f"zero run of {token.length} below minimum {MIN_RUN}")
            out.extend([0] * token.length)
        elif isinstance(token, (int, np.integer)):
            out.append(int(token))
        else:
            raise BitstreamError(f"unexpected token {token!r}")
    return np.array(out, dtype=np.int64)


class ContextModeler:
    """Running magnitude statistics with the induced Rice parameter guess."""

    def __init__(self):
        self.count = 0
        self.total = 0.0

    def update(self, codes) -> None:
        codes = np.asarray(codes)
        self.count += codes.size
        self.total += float(np.sum(np.abs(codes)))

    @property
    def mean_magnitude(self) -> float:
        return self.total / self.count if self.count else 0.0

    @property
    def rice_parameter(self) -> int:
        return max(0, math.floor(math.log2(self.mean_magnitude + 1.0)))


def _grc_size(symbols: np.ndarray, r: int) -> int:
    return int(np.sum(symbols >> r)) + symbols.size * (r + 1)


def _abc_size(symbols: np.ndarray, bound: int) -> int:
    b, t = _abc_params(bound)
    if b == 0:
        return 0
    return int(np.sum(np.where(symbols < t, max(b - 1, 0), b)))


@dataclass(frozen=True)
class ModeChoice:
    mode: str  # "grc" | "abc"
    parameter: int  # rice parameter or bound
    grc_bits: int
    abc_bits: int

    @property
    def payload_bits(self) -> int:
        return self.grc_bits if self.mode == "grc" else self.abc_bits


def _choose_mode(symbols: np.ndarray) -> ModeChoice:
    best_r, best_grc = 0, _grc_size(symbols, 0)
    for r in range(1, MAX_RICE_PARAM + 1):
        size = _grc_size(symbols, r)
        if size < best_grc:
            best_r, best_grc = r, size
    bound = int(symbols.max()) + 1 if symbols.size else 1
    abc_bits = _abc_size(symbols, bound)
    if abc_bits < best_grc:
        return ModeChoice("abc", bound, best_grc, abc_bits)
    return ModeChoice("grc", best_r, best_grc, abc_bits)


def select_mode(codes) -> ModeChoice:
    """Exact-size coder choice for signed codes; ties go to Golomb-Rice."""
    codes = np.asarray(codes, dtype=np.int64).reshape(-1)
    symbols = np.where(codes >= 0, 2 * codes, -2 * codes - 1)
    return _choose_mode(symbols)


@dataclass
class CodedChunk:
    """One entropy-coded sample array plus everything needed to invert it."""

    mode: str
    parameter: int
    run_length: bool
    bits: int
    max_abs: float
    sample_count: int
    payload: bytes
    payload_bits: int

    @property
    def total_bits(self) -> int:
        return _header_bits(self) + self.payload_bits


def _header_bits(chunk: CodedChunk) -> int:
    param_bits = 16 if chunk.mode == "abc" else 5
    varint_bits = 8 * max(1, -(-max(chunk.sample_count, 1).bit_length() // 7))
    return 2 + param_bits + 4 + 32 + varint_bits


def _f32_at_least(x: float) -> float:
    """Smallest float32 value >= x (so recorded bounds never clip a sample)."""
    as32 = np.float32(x)
    if float(as32) < x:
        as32 = np.nextafter(as32, np.float32(np.inf))
    return float(as32)


def _tokens_to_symbols(tokens) -> np.ndarray:
    symbols = []
    for token in tokens:
        if isinstance(token, ZeroRun):
            symbols.append(0)
            symbols.append(token.length - MIN_RUN)
        else:
            symbols.append(zigzag(int(token)) + 1)
    return np.asarray(symbols, dtype=np.int64)


def encode_chunk(values: np.ndarray, bits: int) -> CodedChunk:
    """Quantize and entropy-code one sample array."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    exact_max = float(np.max(np.abs(values))) if values.size else 0.0
    max_abs = _f32_at_least(exact_max)
    codes, _ = quantize(values, bits, max_abs=max_abs)

    plain = np.where(codes >= 0, 2 * codes, -2 * codes - 1)
    tokenized = _tokens_to_symbols(rle_zero(codes))
    plain_choice = _choose_mode(plain)
    rle_choice = _choose_mode(tokenized)
    if rle_choice.payload_bits < plain_choice.payload_bits:
        run_length, symbols, choice = True, tokenized, rle_choice
    else:
        run_length, symbols, choice = False, plain, plain_choice

    writer = BitWriter()
    for u in symbols:
        if choice.mode == "grc":
            _rice_write(writer, int(u), choice.parameter)
        else:
            _abc_write(writer, int(u), choice.parameter)
    return CodedChunk(
        mode=choice.mode,
        parameter=choice.parameter,
        run_length=run_length,
        bits=bits,
        max_abs=max_abs,
        sample_count=values.size,
        payload=writer.getvalue(),
        payload_bits=len(writer),
    )


def decode_chunk(chunk: CodedChunk) -> np.ndarray:
    """Recover the dequantized samples; inverts onto the exact quantizer grid."""
    reader = BitReader(chunk.payload, bit_length=chunk.payload_bits)
    codes = _read_codes(reader, chunk)
    return dequantize(np.asarray(codes, dtype=np.int64), chunk.max_abs, chunk.bits)


def _read_symbol(reader: BitReader, chunk: CodedChunk) -> int:
    if chunk.mode == "grc":
        return _rice_read(reader, chunk.parameter)
    return _abc_read(reader, chunk.parameter)


def _read_codes(reader: BitReader, chunk: CodedChunk) -> list[int]:
    codes: list[int] = []
    while len(codes) < chunk.sample_count:
        symbol = _read_symbol(reader, chunk)
        if not chunk.run_length:
            codes.append(unzigzag(symbol))
        elif symbol == 0:
            run = _read_symbol(reader, chunk) + MIN_RUN
            if len(codes) + run > chunk.sample_count:
                raise BitstreamError(
                    f"zero run overflows chunk ({len(codes)}+{run} > {chunk.sample_count})",
                    bit_offset=reader.position,
                )
            codes.extend([0] * run)
        else:
            codes.append(unzigzag(symbol - 1))
    return codes


def write_chunk(writer: BitWriter, chunk: CodedChunk) -> None:
    """Serialize header + payload into an open bit stream."""
    writer.write_bit(chunk.mode == "abc")
    writer.write_bit(chunk.run_length)
    writer.write_bits(chunk.parameter, 16 if chunk.mode == "abc" else 5)
    writer.write_bits(chunk.bits - 1, 4)
    writer.write_f32(chunk.max_abs)
    writer.write_varint(chunk.sample_count)
    reader = BitReader(chunk.payload, bit_length=chunk.payload_bits)
    for _ in range(chunk.payload_bits):
        writer.write_bit(reader.read_bit())


def read_chunk(reader: BitReader) -> CodedChunk:
    """Parse one chunk, consuming exactly the bits the encoder wrote."""
    mode = "abc" if reader.read_bit() else "grc"
    run_length = bool(reader.read_bit())
    parameter = reader.read_bits(16 if mode == "abc" else 5)
    bits = reader.read_bits(4) + 1
    max_abs = reader.read_f32()
    sample_count = reader.read_varint()
    shell = CodedChunk(mode, parameter, run_length, bits, max_abs, sample_count, b"", 0)
    start = reader.position
    _read_codes(reader, shell)  # advances to the payload end, validating as it goes
    end = reader.position
    sub = BitWriter()
    reader.position = start
    for _ in range(end - start):
        sub.write_bit(reader.read_bit())
    shell.payload = sub.getvalue()
    shell.payload_bits = end - start
    return shell
