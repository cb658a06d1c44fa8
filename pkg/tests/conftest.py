import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from laughsense.audio_io import AudioClip

settings.register_profile(
    "ci", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def make_sine(freq_hz: float, rate: int = 16000, duration_s: float = 1.0,
              amplitude: float = 1.0, phase: float = 0.0, clip_id: str = "sine") -> AudioClip:
    t = np.arange(int(round(duration_s * rate))) / rate
    return AudioClip(clip_id, amplitude * np.sin(2 * np.pi * freq_hz * t + phase), rate)


def make_noise(rate: int = 16000, duration_s: float = 1.0, amplitude: float = 0.3,
               seed: int = 0, clip_id: str = "noise") -> AudioClip:
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * rate))
    return AudioClip(clip_id, amplitude * rng.standard_normal(n), rate)


@pytest.fixture(scope="session")
def synth_corpus_dir(tmp_path_factory):
    """A small deterministic synthetic corpus shared across tests."""
    from laughsense import corpus

    out = tmp_path_factory.mktemp("synth_corpus")
    manifest = corpus.synth_corpus(6, seed=11, out_dir=out)
    return out, manifest


@pytest.fixture(scope="session")
def synth_dataset(synth_corpus_dir):
    from laughsense import corpus

    out, manifest = synth_corpus_dir
    entries = corpus.parse_manifest(manifest)
    samples, exclusions = corpus.build_dataset(entries, out)
    assert not exclusions
    return samples
