"""Binary serialization for token streams, predictor weights, and results.

All formats are little-endian with float32 tensor payloads, so write/read
round-trips are bit-exact against the in-memory float32 arrays.

AVTS (interleaved stream):
    magic "AVTS" | version u32 | T F H W d L d_a u32 | flags u32
    then per chunk: F*H*W x d visual rows, L x d_a audio rows.
    flags bit 0 marks row-major (frame, row, col) token order and must be set.

A2VW (predictor weights):
    magic "A2VW" | version u32 | Q d_h d_a d layers u32 | arch u8
    then tensors in order: queries; per layer norm1 gain, norm1 bias,
    w_q, w_k, w_v, w_o, norm2 gain, norm2 bias; head w1, b1, w2, b2.

AVTZ (compressed stream):
    magic "AVTZ" | version u32 | entries d L d_a u32
    then per entry: tag u8 (0 audio, 1 visual block); audio = chunk u32 +
    rows; visual = chunk count u32, chunk indices, token count u32,
    token indices, rows.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    AudioChunk,
    AudioEntry,
    CompressedStream,
    InterleavedStream,
    PipelineConfig,
    VisualBlock,
    VisualChunk,
)
from .predictor import ARCH_PRENORM_RELU, LayerWeights, PredictorWeights

STREAM_MAGIC = b"AVTS"
WEIGHT_MAGIC = b"A2VW"
COMPRESSED_MAGIC = b"AVTZ"
FORMAT_VERSION = 1
FLAG_ROW_MAJOR = 1

# any single tensor above this element count is treated as a corrupt header
_MAX_ELEMENTS = 1 << 33


class StreamFormatError(ValueError):
    """A binary stream/weight file violates its format contract."""


@dataclass(frozen=True)
class StreamFileHeader:
    t: int
    frames: int
    height: int
    width: int
    dim: int
    audio_tokens: int
    audio_dim: int
    flags: int = FLAG_ROW_MAJOR


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, count: int, what: str) -> bytes:
        if self.offset + count > len(self.data):
            raise StreamFormatError(f"{self.path}: truncated file while reading {what}")
        out = self.data[self.offset : self.offset + count]
        self.offset += count
        return out

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def floats(self, count: int, what: str) -> np.ndarray:
        if count > _MAX_ELEMENTS:
            raise StreamFormatError(f"{self.path}: dimension overflow in {what} ({count} elements)")
        raw = self.take(4 * count, what)
        return np.frombuffer(raw, dtype="<f4", count=count).copy()

    def expect_magic(self, magic: bytes, kind: str) -> None:
        got = self.take(len(magic), "magic")
        if got != magic:
            raise StreamFormatError(f"{self.path}: bad magic {got!r}, expected {magic!r} ({kind})")

    def expect_end(self) -> None:
        if self.offset != len(self.data):
            raise StreamFormatError(
                f"{self.path}: {len(self.data) - self.offset} trailing bytes after payload"
            )


def _f32_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


def write_stream(stream: InterleavedStream, path) -> None:
    """Serialize an interleaved stream to the AVTS format."""
    f, h, w, d, l_audio, d_a = stream.token_geometry
    parts = [
        STREAM_MAGIC,
        struct.pack(
            "<IIIIIIIII",
            FORMAT_VERSION,
            len(stream),
            f,
            h,
            w,
            d,
            l_audio,
            d_a,
            FLAG_ROW_MAJOR,
        ),
    ]
    for visual, audio in stream.chunks:
        parts.append(_f32_bytes(visual.embeddings))
        parts.append(_f32_bytes(audio.embeddings))
    Path(path).write_bytes(b"".join(parts))


def read_stream_header(path) -> StreamFileHeader:
    reader = _Reader(Path(path).read_bytes(), Path(path))
    return _read_stream_header(reader)


def _read_stream_header(reader: _Reader) -> StreamFileHeader:
    reader.expect_magic(STREAM_MAGIC, "token stream")
    version = reader.u32("version")
    if version != FORMAT_VERSION:
        raise StreamFormatError(f"{reader.path}: unsupported version {version}")
    t, f, h, w, d, l_audio, d_a, flags = (reader.u32(name) for name in (
        "T", "F", "H", "W", "d", "L", "d_a", "flags"))
    header = StreamFileHeader(t, f, h, w, d, l_audio, d_a, flags)
    if not flags & FLAG_ROW_MAJOR:
        raise StreamFormatError(f"{reader.path}: row-major order flag not set")
    if min(t, f, h, w, d, l_audio, d_a) < 1:
        raise StreamFormatError(f"{reader.path}: zero dimension in header")
    per_chunk = f * h * w * d + l_audio * d_a
    if per_chunk > _MAX_ELEMENTS or t * per_chunk > _MAX_ELEMENTS:
        raise StreamFormatError(f"{reader.path}: dimension overflow ({t} x {per_chunk} elements)")
    return header


def read_stream(path) -> InterleavedStream:
    """Parse an AVTS file back into an interleaved stream."""
    reader = _Reader(Path(path).read_bytes(), Path(path))
    header = _read_stream_header(reader)
    m = header.frames * header.height * header.width
    chunks = []
    for t in range(header.t):
        visual = reader.floats(m * header.dim, f"chunk {t} visual rows")
        audio = reader.floats(header.audio_tokens * header.audio_dim, f"chunk {t} audio rows")
        chunks.append(
            (
                VisualChunk(
                    header.frames,
                    header.height,
                    header.width,
                    visual.reshape(m, header.dim),
                ),
                AudioChunk(audio.reshape(header.audio_tokens, header.audio_dim)),
            )
        )
    reader.expect_end()
    return InterleavedStream(tuple(chunks))


def _weight_tensors(weights: PredictorWeights) -> list[np.ndarray]:
    tensors = [weights.queries]
    for layer in weights.layers:
        tensors.extend(
            [
                layer.norm1_gain,
                layer.norm1_bias,
                layer.w_q,
                layer.w_k,
                layer.w_v,
                layer.w_o,
                layer.norm2_gain,
                layer.norm2_bias,
            ]
        )
    tensors.extend([weights.head_w1, weights.head_b1, weights.head_w2, weights.head_b2])
    return tensors


def write_weights(weights: PredictorWeights, path) -> None:
    """Serialize predictor weights to the A2VW format."""
    dims = weights.dims
    parts = [
        WEIGHT_MAGIC,
        struct.pack(
            "<IIIIIIB",
            FORMAT_VERSION,
            dims["Q"],
            dims["d_h"],
            dims["d_a"],
            dims["d"],
            dims["layers"],
            ARCH_PRENORM_RELU,
        ),
    ]
    parts.extend(_f32_bytes(t) for t in _weight_tensors(weights))
    Path(path).write_bytes(b"".join(parts))


def read_weights(path) -> PredictorWeights:
    """Parse an A2VW file back into predictor weights."""
    reader = _Reader(Path(path).read_bytes(), Path(path))
    reader.expect_magic(WEIGHT_MAGIC, "predictor weights")
    version = reader.u32("version")
    if version != FORMAT_VERSION:
        raise StreamFormatError(f"{reader.path}: unsupported version {version}")
    q = reader.u32("Q")
    d_h = reader.u32("d_h")
    d_a = reader.u32("d_a")
    d = reader.u32("d")
    layers = reader.u32("layers")
    arch = reader.u8("architecture byte")
    if arch != ARCH_PRENORM_RELU:
        raise StreamFormatError(f"{reader.path}: unknown architecture byte {arch}")
    if min(q, d_h, d_a, d, layers) < 1:
        raise StreamFormatError(f"{reader.path}: zero dimension in header")
    if max(q * d_h, d_a * d_h, d_h * d) > _MAX_ELEMENTS:
        raise StreamFormatError(f"{reader.path}: dimension overflow in weight header")

    def tensor(rows: int, cols: int, what: str) -> np.ndarray:
        return reader.floats(rows * cols, what).reshape(rows, cols)

    def vector(n: int, what: str) -> np.ndarray:
        return reader.floats(n, what)

    queries = tensor(q, d_h, "queries")
    layer_list = []
    for i in range(layers):
        layer_list.append(
            LayerWeights(
                norm1_gain=vector(d_h, f"layer {i} norm1 gain"),
                norm1_bias=vector(d_h, f"layer {i} norm1 bias"),
                w_q=tensor(d_h, d_h, f"layer {i} w_q"),
                w_k=tensor(d_a, d_h, f"layer {i} w_k"),
                w_v=tensor(d_a, d_h, f"layer {i} w_v"),
                w_o=tensor(d_h, d_h, f"layer {i} w_o"),
                norm2_gain=vector(d_h, f"layer {i} norm2 gain"),
                norm2_bias=vector(d_h, f"layer {i} norm2 bias"),
            )
        )
    weights = PredictorWeights(
        queries=queries,
        layers=tuple(layer_list),
        head_w1=tensor(d_h, d_h, "head w1"),
        head_b1=vector(d_h, "head b1"),
        head_w2=tensor(d_h, d, "head w2"),
        head_b2=vector(d, "head b2"),
    )
    reader.expect_end()
    return weights


def write_compressed(compressed: CompressedStream, path) -> None:
    """Serialize a compressed stream to the AVTZ format."""
    blocks = compressed.visual_blocks()
    audio = compressed.audio_entries()
    d = blocks[0].embeddings.shape[1] if blocks else 0
    l_audio = audio[0].audio.token_count if audio else 0
    d_a = audio[0].audio.dim if audio else 0
    parts = [
        COMPRESSED_MAGIC,
        struct.pack("<IIIII", FORMAT_VERSION, len(compressed.entries), d, l_audio, d_a),
    ]
    for entry in compressed.entries:
        if isinstance(entry, AudioEntry):
            parts.append(struct.pack("<BI", 0, entry.chunk_index))
            parts.append(_f32_bytes(entry.audio.embeddings))
        else:
            parts.append(struct.pack("<BI", 1, len(entry.chunk_indices)))
            parts.append(np.asarray(entry.chunk_indices, dtype="<u4").tobytes())
            parts.append(struct.pack("<I", entry.token_indices.shape[0]))
            parts.append(entry.token_indices.astype("<u4").tobytes())
            parts.append(_f32_bytes(entry.embeddings))
    Path(path).write_bytes(b"".join(parts))


def read_compressed(path) -> CompressedStream:
    """Parse an AVTZ file back into a compressed stream."""
    reader = _Reader(Path(path).read_bytes(), Path(path))
    reader.expect_magic(COMPRESSED_MAGIC, "compressed stream")
    version = reader.u32("version")
    if version != FORMAT_VERSION:
        raise StreamFormatError(f"{reader.path}: unsupported version {version}")
    n_entries = reader.u32("entry count")
    d = reader.u32("d")
    l_audio = reader.u32("L")
    d_a = reader.u32("d_a")
    entries: list[object] = []
    for i in range(n_entries):
        tag = reader.u8(f"entry {i} tag")
        if tag == 0:
            chunk_index = reader.u32(f"entry {i} chunk index")
            rows = reader.floats(l_audio * d_a, f"entry {i} audio rows")
            entries.append(AudioEntry(chunk_index, AudioChunk(rows.reshape(l_audio, d_a))))
        elif tag == 1:
            n_chunks = reader.u32(f"entry {i} chunk count")
            raw = reader.take(4 * n_chunks, f"entry {i} chunk indices")
            chunk_indices = tuple(int(x) for x in np.frombuffer(raw, dtype="<u4"))
            n_tokens = reader.u32(f"entry {i} token count")
            raw = reader.take(4 * n_tokens, f"entry {i} token indices")
            token_indices = np.frombuffer(raw, dtype="<u4").astype(np.int64)
            rows = reader.floats(n_tokens * d, f"entry {i} rows")
            entries.append(VisualBlock(chunk_indices, token_indices, rows.reshape(n_tokens, d)))
        else:
            raise StreamFormatError(f"{reader.path}: unknown entry tag {tag}")
    reader.expect_end()
    return CompressedStream(tuple(entries))


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    """Load a JSON pipeline config; unknown keys are errors, overrides win."""
    raw = json.loads(Path(path).read_text()) if path is not None else {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**raw)
