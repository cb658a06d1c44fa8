import numpy as np
import pytest

from laughsense import audio_io, features
from laughsense.audio_io import AudioClip, SilentClipError
from laughsense.corpus import synth_laugh, SYNTH_RATE_HZ
from laughsense.dsp import FrameSpec
from laughsense.features import (
    FEATURE_NAMES,
    InsufficientVoicingError,
    PitchTrack,
    extract_manual_features,
    f0_statistics,
    formant_means,
    intensity_statistics,
    laughter_rate,
    peak_frequency,
    spectral_cog,
    track_f0,
    voicing_measures,
)

from conftest import make_noise, make_sine


def resonate(x, freq_hz, bandwidth_hz, rate):
    """Drive x through a 2-pole resonator (true all-pole source-filter stage)."""
    r = np.exp(-np.pi * bandwidth_hz / rate)
    a1 = -2.0 * r * np.cos(2 * np.pi * freq_hz / rate)
    a2 = r * r
    y = np.zeros_like(x)
    for i in range(x.size):
        y[i] = x[i]
        if i >= 1:
            y[i] -= a1 * y[i - 1]
        if i >= 2:
            y[i] -= a2 * y[i - 2]
    return y


def make_vowel(f1, f2, f0=120.0, rate=16000, duration_s=1.0, seed=0):
    """Pulse train through cascaded two-pole resonators."""
    rng = np.random.default_rng(seed)
    n = int(duration_s * rate)
    excitation = np.zeros(n)
    pos = 0.0
    while pos < duration_s:
        idx = int(round(pos * rate))
        if idx < n:
            excitation[idx] = 1.0
        pos += 1.0 / (f0 * (1.0 + rng.normal(0, 0.005)))
    out = resonate(resonate(excitation, f1, 80.0, rate), f2, 100.0, rate)
    return AudioClip("vowel", 0.5 * out / np.max(np.abs(out)), rate)


def make_burst_train(n_bursts=5, duration_s=2.0, rate=16000, seed=0):
    """Tone bursts over a low noise floor, for the impulse detector."""
    rng = np.random.default_rng(seed)
    n = int(duration_s * rate)
    out = 0.004 * rng.standard_normal(n)
    spacing = duration_s / n_bursts
    for k in range(n_bursts):
        start = int((k * spacing + 0.05) * rate)
        length = int(0.08 * rate)
        t = np.arange(length) / rate
        burst = 0.6 * np.sin(2 * np.pi * 180.0 * t) * np.hanning(length)
        out[start : start + length] += burst
    return AudioClip("bursts", out, rate)


class TestTrackF0:
    def test_sine_220hz_voiced_and_accurate(self):
        clip = make_sine(220.0, rate=16000, duration_s=1.0)
        track = track_f0(clip)
        assert all(v is not None for v in track.f0_hz)
        values = track.voiced_values()
        assert np.all(np.abs(values - 220.0) <= 2.2)

    def test_white_noise_mostly_unvoiced(self):
        clip = make_noise(seed=9, duration_s=1.0)
        track = track_f0(clip)
        unvoiced = sum(v is None for v in track.f0_hz)
        assert unvoiced / len(track.f0_hz) >= 0.9

    def test_silence_all_unvoiced(self):
        track = track_f0(AudioClip("s", np.zeros(16000), 16000))
        assert len(track.f0_hz) > 0
        assert all(v is None for v in track.f0_hz)

    def test_too_short_clip_errors(self):
        clip = AudioClip("x", np.ones(400), 16000)
        with pytest.raises(ValueError):
            track_f0(clip)


class TestF0Statistics:
    def test_three_frame_track(self):
        spec = FrameSpec(0.05, 0.01)
        track = PitchTrack(spec, [100.0, 110.0, 120.0], [0.9, 0.9, 0.9])
        mn, mx, mean, rng_, std, slope = f0_statistics(track)
        assert (mn, mx, mean, rng_) == (100.0, 120.0, 110.0, 20.0)
        assert std == pytest.approx(8.16497, abs=1e-4)  # population std of [100,110,120]
        assert slope == pytest.approx(1000.0)

    def test_constant_track(self):
        track = PitchTrack(FrameSpec(0.05, 0.01), [150.0] * 5, [0.9] * 5)
        mn, mx, mean, rng_, std, slope = f0_statistics(track)
        assert rng_ == 0.0 and std == 0.0 and slope == 0.0

    def test_no_adjacent_voiced_pair_errors(self):
        track = PitchTrack(FrameSpec(0.05, 0.01), [100.0, None, 120.0], [0.9, None, 0.9])
        with pytest.raises(InsufficientVoicingError):
            f0_statistics(track)

    def test_single_voiced_frame_errors(self):
        track = PitchTrack(FrameSpec(0.05, 0.01), [100.0, None], [0.9, None])
        with pytest.raises(InsufficientVoicingError):
            f0_statistics(track)


class TestVoicingMeasures:
    def test_pure_sine_high_hnr(self):
        clip = make_sine(220.0, rate=16000, duration_s=1.0)
        pct, hnr = voicing_measures(clip, track_f0(clip))
        assert pct >= 99.0
        assert hnr >= 40.0

    def test_10db_snr_mixture(self):
        rng = np.random.default_rng(14)
        rate = 16000
        t = np.arange(rate) / rate
        signal = np.sqrt(2.0) * np.sin(2 * np.pi * 220.0 * t)  # unit power
        noise = np.sqrt(0.1) * rng.standard_normal(rate)  # 10 dB below
        clip = AudioClip("mix", 0.3 * (signal + noise), rate)
        _, hnr = voicing_measures(clip, track_f0(clip))
        assert hnr == pytest.approx(10.0, abs=1.5)

    def test_percentage_definition(self):
        f0 = [100.0] * 50 + [None] * 50
        strength = [0.9] * 50 + [None] * 50
        track = PitchTrack(FrameSpec(0.05, 0.01), f0, strength)
        clip = make_sine(100.0, duration_s=1.1)
        pct, _ = voicing_measures(clip, track)
        assert pct == 50.0

    def test_no_voiced_frames_errors(self):
        track = PitchTrack(FrameSpec(0.05, 0.01), [None] * 10, [None] * 10)
        with pytest.raises(InsufficientVoicingError):
            voicing_measures(make_sine(100.0), track)


class TestFormantMeans:
    def test_two_resonator_vowel(self):
        clip = make_vowel(700.0, 1200.0, f0=120.0)
        f1, f2 = formant_means(clip, track_f0(clip))
        assert f1 == pytest.approx(700.0, abs=50.0)
        assert f2 == pytest.approx(1200.0, abs=75.0)

    def test_single_resonator_does_not_fabricate_f2(self):
        rate = 16000
        rng = np.random.default_rng(3)
        n = rate
        excitation = np.zeros(n)
        pos = 0.0
        while pos < 1.0:
            idx = int(round(pos * rate))
            if idx < n:
                excitation[idx] = 1.0
            pos += 1.0 / (120.0 * (1.0 + rng.normal(0, 0.005)))
        out = resonate(excitation, 500.0, 90.0, rate)
        clip = AudioClip("single", 0.5 * out / np.max(np.abs(out)), rate)
        track = track_f0(clip)
        try:
            f1, f2 = formant_means(clip, track)
        except InsufficientVoicingError:
            return  # refusing to produce F2 is the documented alternative
        assert f1 == pytest.approx(500.0, abs=50.0)
        assert f2 > f1  # whatever residual root was found, it is not the F1 line again

    def test_silence_errors(self):
        clip = AudioClip("s", np.zeros(16000), 16000)
        track = track_f0(clip)
        with pytest.raises(InsufficientVoicingError):
            formant_means(clip, track)


class TestSpectralShape:
    def test_pure_tone_cog(self):
        assert spectral_cog(make_sine(1000.0)) == pytest.approx(1000.0, abs=10.0)

    def test_white_noise_cog_near_half_nyquist(self):
        rng = np.random.default_rng(21)
        cogs = [
            spectral_cog(AudioClip("w", rng.standard_normal(8000), 16000))
            for _ in range(100)
        ]
        assert np.mean(cogs) == pytest.approx(4000.0, abs=150.0)

    def test_equal_power_tones_average(self):
        t = np.arange(16000) / 16000
        x = np.sin(2 * np.pi * 500.0 * t) + np.sin(2 * np.pi * 1500.0 * t + 0.7)
        assert spectral_cog(AudioClip("two", 0.4 * x, 16000)) == pytest.approx(1000.0, abs=10.0)

    def test_silent_clip_errors(self):
        with pytest.raises(SilentClipError):
            spectral_cog(AudioClip("s", np.zeros(16000), 16000))

    def test_peak_frequency_pure_tone(self):
        assert peak_frequency(make_sine(1000.0)) == pytest.approx(1000.0, abs=5.0)

    def test_peak_frequency_dominant_component(self):
        t = np.arange(16000) / 16000
        x = np.sin(2 * np.pi * 300.0 * t) + np.sqrt(0.5) * np.sin(2 * np.pi * 2000.0 * t)
        assert peak_frequency(AudioClip("d", 0.4 * x, 16000)) == pytest.approx(300.0, abs=5.0)

    def test_peak_frequency_silence_errors(self):
        with pytest.raises(SilentClipError):
            peak_frequency(AudioClip("s", np.zeros(16000), 16000))


class TestIntensityStatistics:
    def test_constant_sine_is_flat(self):
        clip = make_sine(250.0, duration_s=1.0, amplitude=0.5)
        _, _, _, std, rng_ = intensity_statistics(clip)
        assert std <= 0.2
        assert rng_ <= 0.5

    def test_amplitude_step_gives_20db_range(self):
        rate = 16000
        t = np.arange(rate) / rate
        first = 0.1 * np.sin(2 * np.pi * 250.0 * t)
        second = 1.0 * np.sin(2 * np.pi * 250.0 * t)
        clip = AudioClip("step", np.concatenate([first, second]), rate)
        *_, rng_ = intensity_statistics(clip)
        assert rng_ == pytest.approx(20.0, abs=1.0)

    def test_normalized_clip_peaks_at_70(self, synth_dataset):
        for sample in synth_dataset[:4]:
            assert sample.features.spl_max_db == pytest.approx(70.0, abs=0.1)

    def test_silent_clip_errors(self):
        with pytest.raises(SilentClipError):
            intensity_statistics(AudioClip("s", np.zeros(16000), 16000))


class TestLaughterRate:
    def test_five_bursts_over_two_seconds(self):
        clip = make_burst_train(n_bursts=5, duration_s=2.0, seed=1)
        duration, rate = laughter_rate(clip)
        assert duration == pytest.approx(2.0, abs=1e-6)
        assert rate == pytest.approx(2.5, abs=0.5)

    def test_continuous_tone_has_at_most_one_impulse(self):
        clip = make_sine(200.0, duration_s=1.5)
        duration, rate = laughter_rate(clip)
        assert rate <= 1.0 / duration + 1e-9

    def test_rate_is_count_over_duration(self):
        clip = make_burst_train(n_bursts=5, duration_s=2.0, seed=2)
        duration, rate = laughter_rate(clip)
        assert rate * duration == pytest.approx(round(rate * duration), abs=1e-9)

    def test_silence_reports_zero_rate(self):
        duration, rate = laughter_rate(AudioClip("s", np.zeros(32000), 16000))
        assert duration == 2.0
        assert rate == 0.0


def _laugh_clip(seed, **overrides):
    rng = np.random.default_rng(seed)
    params = dict(f0_hz=180.0, f1_hz=650.0, f2_hz=1500.0, brightness=0.4,
                  level_spread=0.3, duration_s=1.8, n_bursts=4)
    params.update(overrides)
    clip = AudioClip(f"laugh{seed}", synth_laugh(rng, **params), SYNTH_RATE_HZ)
    return audio_io.normalize_peak_spl(clip, 70.0)


class TestExtractManualFeatures:
    def test_synthetic_laugh_satisfies_invariants(self):
        vector = extract_manual_features(_laugh_clip(0))
        vector.validate()
        arr = vector.as_array()
        assert np.all(np.isfinite(arr))
        assert vector.f0_range_hz == vector.f0_max_hz - vector.f0_min_hz
        assert vector.spl_range_db == vector.spl_max_db - vector.spl_min_db

    def test_silence_errors(self):
        with pytest.raises((SilentClipError, InsufficientVoicingError)):
            extract_manual_features(AudioClip("s", np.zeros(32000), 16000))

    def test_deterministic(self):
        clip = _laugh_clip(1)
        first = extract_manual_features(clip).as_array()
        second = extract_manual_features(clip).as_array()
        assert np.array_equal(first, second)

    def test_gain_changes_only_spl_statistics(self):
        clip = _laugh_clip(2)
        base = extract_manual_features(clip).as_array()
        for gain in (0.2, 3.0):
            other = extract_manual_features(clip.scaled(gain)).as_array()
            for i, name in enumerate(FEATURE_NAMES):
                if name.startswith("spl_"):
                    continue
                assert other[i] == pytest.approx(base[i], rel=1e-6), name

    def test_prepended_silence_shifts_duration_only(self):
        clip = _laugh_clip(3)
        shifted = AudioClip(
            "shifted",
            np.concatenate([np.zeros(int(0.1 * clip.sample_rate_hz)), clip.samples]),
            clip.sample_rate_hz,
        )
        base = extract_manual_features(clip)
        moved = extract_manual_features(shifted)
        assert moved.duration_s == pytest.approx(base.duration_s + 0.1, abs=1e-9)
        for name in ("f0_mean_hz", "f1_mean_hz", "f2_mean_hz", "cog_hz"):
            assert getattr(moved, name) == pytest.approx(getattr(base, name), rel=0.01), name

    def test_no_nan_on_random_clips(self):
        for seed in range(8):
            vector = extract_manual_features(_laugh_clip(100 + seed))
            assert np.all(np.isfinite(vector.as_array()))
