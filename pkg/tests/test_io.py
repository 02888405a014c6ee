import numpy as np
import pytest

from avpress.core import AudioChunk, InterleavedStream, PipelineConfig, VisualChunk
from avpress.pipeline import compress
from avpress.predictor import init_weights
from avpress.stream_io import (
    StreamFormatError,
    load_config,
    read_compressed,
    read_stream,
    read_stream_header,
    read_weights,
    write_compressed,
    write_stream,
    write_weights,
)


def random_stream(t=2, f=1, h=2, w=2, d=3, l_audio=2, d_a=4, seed=0):
    rng = np.random.default_rng(seed)
    chunks = []
    for _ in range(t):
        chunks.append(
            (
                VisualChunk(f, h, w, rng.standard_normal((f * h * w, d)).astype(np.float32)),
                AudioChunk(rng.standard_normal((l_audio, d_a)).astype(np.float32)),
            )
        )
    return InterleavedStream(tuple(chunks))


def assert_streams_equal(a: InterleavedStream, b: InterleavedStream):
    assert len(a) == len(b)
    for (va, aa), (vb, ab) in zip(a.chunks, b.chunks):
        assert (va.frames, va.height, va.width) == (vb.frames, vb.height, vb.width)
        np.testing.assert_array_equal(va.embeddings, vb.embeddings)
        np.testing.assert_array_equal(aa.embeddings, ab.embeddings)


class TestStreamRoundTrip:
    def test_round_trip_bit_exact(self, tmp_path):
        stream = random_stream()
        path = tmp_path / "s.avts"
        write_stream(stream, path)
        assert_streams_equal(stream, read_stream(path))

    def test_file_size_arithmetic(self, tmp_path):
        # header = 4 magic + 9 u32 fields; payload = T * (M*d + L*d_a) floats
        stream = random_stream(t=2, f=1, h=2, w=2, d=3, l_audio=2, d_a=4)
        path = tmp_path / "s.avts"
        write_stream(stream, path)
        assert path.stat().st_size == 40 + 2 * (4 * 3 + 2 * 4) * 4

    def test_write_is_deterministic(self, tmp_path):
        stream = random_stream(seed=5)
        p1, p2 = tmp_path / "a.avts", tmp_path / "b.avts"
        write_stream(stream, p1)
        write_stream(stream, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_only_read(self, tmp_path):
        stream = random_stream(t=3, f=2, h=4, w=5, d=7, l_audio=2, d_a=4)
        path = tmp_path / "s.avts"
        write_stream(stream, path)
        header = read_stream_header(path)
        assert (header.t, header.frames, header.height, header.width) == (3, 2, 4, 5)
        assert (header.dim, header.audio_tokens, header.audio_dim) == (7, 2, 4)


class TestStreamErrors:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "s.avts"
        write_stream(random_stream(), path)
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(StreamFormatError, match="bad magic"):
            read_stream(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "s.avts"
        write_stream(random_stream(), path)
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(StreamFormatError, match="truncated"):
            read_stream(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "s.avts"
        write_stream(random_stream(), path)
        path.write_bytes(path.read_bytes()[:20])
        with pytest.raises(StreamFormatError, match="truncated"):
            read_stream(path)

    def test_dimension_overflow(self, tmp_path):
        path = tmp_path / "s.avts"
        write_stream(random_stream(), path)
        data = bytearray(path.read_bytes())
        # blow up T and d in the header
        data[8:12] = (2**31 - 1).to_bytes(4, "little")
        data[24:28] = (2**31 - 1).to_bytes(4, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(StreamFormatError, match="overflow"):
            read_stream(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "s.avts"
        write_stream(random_stream(), path)
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(StreamFormatError, match="trailing"):
            read_stream(path)

    def test_zero_dimension_rejected(self, tmp_path):
        path = tmp_path / "s.avts"
        write_stream(random_stream(), path)
        data = bytearray(path.read_bytes())
        data[12:16] = (0).to_bytes(4, "little")  # F = 0
        path.write_bytes(bytes(data))
        with pytest.raises(StreamFormatError, match="zero dimension"):
            read_stream(path)


class TestWeightsRoundTrip:
    def test_round_trip_bit_exact(self, tmp_path):
        weights = init_weights(3, Q=4, d_h=8, d_a=6, d=5, layers=2)
        path = tmp_path / "w.a2vw"
        write_weights(weights, path)
        loaded = read_weights(path)
        np.testing.assert_array_equal(weights.queries, loaded.queries)
        for la, lb in zip(weights.layers, loaded.layers):
            for name in ("norm1_gain", "norm1_bias", "w_q", "w_k", "w_v", "w_o",
                         "norm2_gain", "norm2_bias"):
                np.testing.assert_array_equal(getattr(la, name), getattr(lb, name))
        np.testing.assert_array_equal(weights.head_w1, loaded.head_w1)
        np.testing.assert_array_equal(weights.head_b1, loaded.head_b1)
        np.testing.assert_array_equal(weights.head_w2, loaded.head_w2)
        np.testing.assert_array_equal(weights.head_b2, loaded.head_b2)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "w.a2vw"
        write_weights(init_weights(0, Q=2, d_h=4, d_a=3, d=3, layers=1), path)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(StreamFormatError, match="bad magic"):
            read_weights(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "w.a2vw"
        write_weights(init_weights(0, Q=2, d_h=4, d_a=3, d=3, layers=1), path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(StreamFormatError, match="truncated"):
            read_weights(path)

    def test_unknown_architecture_byte(self, tmp_path):
        path = tmp_path / "w.a2vw"
        write_weights(init_weights(0, Q=2, d_h=4, d_a=3, d=3, layers=1), path)
        data = bytearray(path.read_bytes())
        data[28] = 99  # architecture byte follows magic + 6 u32 fields
        path.write_bytes(bytes(data))
        with pytest.raises(StreamFormatError, match="architecture"):
            read_weights(path)


class TestCompressedRoundTrip:
    def test_round_trip(self, tmp_path):
        stream = random_stream(t=4, h=4, w=4, d=8, seed=7)
        weights = init_weights(1, Q=4, d_h=8, d_a=4, d=8, layers=1)
        result = compress(stream, weights, PipelineConfig())
        path = tmp_path / "z.avtz"
        write_compressed(result.compressed, path)
        loaded = read_compressed(path)
        assert len(loaded.entries) == len(result.compressed.entries)
        for a, b in zip(result.compressed.entries, loaded.entries):
            assert type(a) is type(b)
            if hasattr(a, "token_indices"):
                assert a.chunk_indices == b.chunk_indices
                np.testing.assert_array_equal(a.token_indices, b.token_indices)
                np.testing.assert_array_equal(a.embeddings, b.embeddings)
            else:
                assert a.chunk_index == b.chunk_index
                np.testing.assert_array_equal(a.audio.embeddings, b.audio.embeddings)

    def test_online_round_trip(self, tmp_path):
        stream = random_stream(t=3, h=4, w=4, d=8, seed=8)
        weights = init_weights(1, Q=4, d_h=8, d_a=4, d=8, layers=1)
        result = compress(stream, weights, PipelineConfig(mode="online"))
        path = tmp_path / "z.avtz"
        write_compressed(result.compressed, path)
        loaded = read_compressed(path)
        assert len(loaded.entries) == len(result.compressed.entries)


class TestFuzzedRoundTrips:
    def test_many_random_streams_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        for i in range(50):
            t = int(rng.integers(1, 4))
            f = int(rng.integers(1, 3))
            h = int(rng.integers(1, 5))
            w = int(rng.integers(1, 5))
            d = int(rng.integers(1, 6))
            l_audio = int(rng.integers(1, 4))
            d_a = int(rng.integers(1, 6))
            stream = random_stream(t, f, h, w, d, l_audio, d_a, seed=i)
            path = tmp_path / f"s{i}.avts"
            write_stream(stream, path)
            first = path.read_bytes()
            assert_streams_equal(stream, read_stream(path))
            write_stream(read_stream(path), path)
            assert path.read_bytes() == first


class TestConfigLoading:
    def test_round_trip_fields(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"rho_sem": 0.4, "rho_spa": 0.2, "tau_merge": 0.9, "mode": "online"}')
        cfg = load_config(path)
        assert cfg == PipelineConfig(rho_sem=0.4, rho_spa=0.2, tau_merge=0.9, mode="online")

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"rho_semantic": 0.4}')
        with pytest.raises(ValueError, match="unknown config keys"):
            load_config(path)

    def test_overrides_take_precedence(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"rho_sem": 0.4}')
        cfg = load_config(path, overrides={"rho_sem": 0.7, "rho_spa": None})
        assert cfg.rho_sem == 0.7
        assert cfg.rho_spa == 0.1  # default, None override ignored

    def test_missing_file_defaults(self):
        assert load_config(None) == PipelineConfig()
