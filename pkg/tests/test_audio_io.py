import struct
import wave

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laughsense import audio_io
from laughsense.audio_io import AudioClip, SilentClipError

from conftest import make_sine

FULL_SCALE_SINE_SPL = 90.9691  # 20*log10((1/sqrt(2)) / 2e-5)


def write_with_stdlib(path, samples_int16, rate=16000, channels=1):
    """Independent writer for load_wav oracle tests."""
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(channels)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(np.asarray(samples_int16, dtype="<i2").tobytes())


class TestLoadWav:
    def test_int16_full_scale_scaling(self, tmp_path):
        path = tmp_path / "const.wav"
        write_with_stdlib(path, np.full(1000, 16384))
        clip = audio_io.load_wav(path)
        assert np.allclose(clip.samples, 0.5)
        assert clip.id == "const"

    def test_stereo_channel_mean(self, tmp_path):
        path = tmp_path / "stereo.wav"
        left = np.full(500, int(0.2 * 32768))
        right = np.full(500, int(0.6 * 32768))
        write_with_stdlib(path, np.column_stack([left, right]).ravel(), channels=2)
        clip = audio_io.load_wav(path)
        assert clip.samples.shape == (500,)
        assert np.allclose(clip.samples, 0.4, atol=1e-4)

    def test_one_second_file_roundtrip_against_stdlib(self, tmp_path):
        rng = np.random.default_rng(5)
        raw = rng.integers(-32768, 32768, size=16000).astype(np.int16)
        path = tmp_path / "sec.wav"
        write_with_stdlib(path, raw, rate=16000)
        clip = audio_io.load_wav(path)
        assert clip.samples.size == 16000
        assert clip.sample_rate_hz == 16000
        assert np.array_equal(clip.samples, raw / 32768.0)

    def test_float32_payload(self, tmp_path):
        samples = np.linspace(-0.5, 0.5, 256).astype("<f4")
        payload = samples.tobytes()
        header = struct.pack(
            "<4sI4s4sIHHIIHH4sI", b"RIFF", 36 + len(payload), b"WAVE", b"fmt ", 16,
            3, 1, 16000, 16000 * 4, 4, 32, b"data", len(payload),
        )
        path = tmp_path / "f32.wav"
        path.write_bytes(header + payload)
        clip = audio_io.load_wav(path)
        assert np.allclose(clip.samples, samples.astype(np.float64))

    def test_non_pcm_compression_rejected(self, tmp_path):
        payload = b"\x00" * 64
        header = struct.pack(
            "<4sI4s4sIHHIIHH4sI", b"RIFF", 36 + len(payload), b"WAVE", b"fmt ", 16,
            7, 1, 16000, 16000, 1, 8, b"data", len(payload),  # 7 = mu-law
        )
        path = tmp_path / "mulaw.wav"
        path.write_bytes(header + payload)
        with pytest.raises(ValueError, match="non-PCM"):
            audio_io.load_wav(path)

    def test_zero_length_payload_rejected(self, tmp_path):
        header = struct.pack(
            "<4sI4s4sIHHIIHH4sI", b"RIFF", 36, b"WAVE", b"fmt ", 16,
            1, 1, 16000, 32000, 2, 16, b"data", 0,
        )
        path = tmp_path / "empty.wav"
        path.write_bytes(header)
        with pytest.raises(ValueError, match="zero-length"):
            audio_io.load_wav(path)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            audio_io.load_wav(tmp_path / "missing.wav")

    @given(st.lists(st.integers(-32768, 32767), min_size=100, max_size=2000))
    def test_write_then_load_roundtrips_int16_bit_exact(self, values):
        import tempfile
        from pathlib import Path

        raw = np.array(values, dtype=np.int16)
        clip = AudioClip("x", raw / 32768.0, 16000)
        with tempfile.TemporaryDirectory() as td:
            tmp = Path(td) / "x.wav"
            audio_io.write_wav(tmp, clip)
            back = audio_io.load_wav(tmp)
        assert np.array_equal(back.samples, clip.samples)


class TestPeakSpl:
    def test_full_scale_sine(self):
        clip = make_sine(1000.0, rate=16000, amplitude=1.0)
        assert audio_io.peak_spl(clip) == pytest.approx(FULL_SCALE_SINE_SPL, abs=0.1)

    def test_tenth_scale_sine_is_20db_down(self):
        clip = make_sine(1000.0, rate=16000, amplitude=0.1)
        assert audio_io.peak_spl(clip) == pytest.approx(FULL_SCALE_SINE_SPL - 20.0, abs=0.1)

    def test_silence_errors(self):
        clip = AudioClip("z", np.zeros(16000), 16000)
        with pytest.raises(SilentClipError):
            audio_io.peak_spl(clip)


class TestNormalize:
    def test_gain_to_70db(self):
        clip = make_sine(1000.0, amplitude=1.0)
        out = audio_io.normalize_peak_spl(clip, 70.0)
        assert np.max(np.abs(out.samples)) == pytest.approx(0.0894, abs=0.0005)
        assert audio_io.peak_spl(out) == pytest.approx(70.0, abs=0.01)

    def test_already_at_target_is_identity(self):
        clip = audio_io.normalize_peak_spl(make_sine(500.0), 70.0)
        again = audio_io.normalize_peak_spl(clip, 70.0)
        assert np.allclose(again.samples, clip.samples, rtol=1e-6)

    def test_silent_input_errors(self):
        with pytest.raises(SilentClipError):
            audio_io.normalize_peak_spl(AudioClip("z", np.zeros(8000), 16000))

    @given(st.floats(min_value=0.01, max_value=100.0))
    def test_gain_invariance(self, gain):
        clip = make_sine(240.0, duration_s=0.5)
        direct = audio_io.normalize_peak_spl(clip, 70.0)
        scaled = audio_io.normalize_peak_spl(clip.scaled(gain), 70.0)
        assert np.allclose(direct.samples, scaled.samples, rtol=1e-6)

    @given(st.floats(min_value=40.0, max_value=90.0))
    def test_idempotent_at_any_target(self, target):
        clip = make_sine(123.0, duration_s=0.5)
        once = audio_io.normalize_peak_spl(clip, target)
        twice = audio_io.normalize_peak_spl(once, target)
        assert np.allclose(once.samples, twice.samples, rtol=1e-6)


class TestSegment:
    def test_interior_segment(self):
        clip = make_sine(200.0, rate=16000, duration_s=2.0)
        piece = audio_io.segment(clip, 0.5, 1.5)
        assert piece.samples.size == 16000
        assert np.array_equal(piece.samples, clip.samples[8000:24000])

    def test_full_duration_is_identity(self):
        clip = make_sine(200.0, duration_s=1.0)
        piece = audio_io.segment(clip, 0.0, clip.duration_s)
        assert np.array_equal(piece.samples, clip.samples)

    def test_inverted_interval_errors(self):
        clip = make_sine(200.0, duration_s=2.0)
        with pytest.raises(ValueError):
            audio_io.segment(clip, 1.5, 0.5)

    def test_out_of_range_errors(self):
        clip = make_sine(200.0, duration_s=1.0)
        with pytest.raises(ValueError):
            audio_io.segment(clip, 0.0, 2.0)


class TestAudioClipInvariants:
    def test_empty_samples_rejected(self):
        with pytest.raises(ValueError):
            AudioClip("x", np.array([]), 16000)

    def test_low_rate_rejected(self):
        with pytest.raises(ValueError):
            AudioClip("x", np.zeros(100), 4000)
