"""Audio IO, mel spectrograms, and the paralinguistic descriptor vector."""

import numpy as np
import pytest
from scipy.io import wavfile

from pairview.audio import Waveform, pad_or_trim, read_audio, write_wav
from pairview.dsp import (
    MelConfig,
    PARA_FEATURE_NAMES,
    estimate_f0,
    hz_to_mel,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz,
    paralinguistic_vector,
)
from pairview.errors import FormatError, InputTooShort, UnsupportedError

RATE = 16000


def tone(freq, seconds, rate=RATE, amp=0.5):
    t = np.arange(int(seconds * rate)) / rate
    return (amp * np.sin(2 * np.pi * freq * t)).astype(np.float32)


def wave(samples, rate=RATE):
    return Waveform(samples=np.asarray(samples, dtype=np.float32), sample_rate=rate)


# ---------------------------------------------------------------------------
# audio io
# ---------------------------------------------------------------------------


def test_read_16bit_identity_scaling(tmp_path):
    pcm = np.array([0, 16384, -16384, 32767, -32768], dtype=np.int16)
    wavfile.write(tmp_path / "x.wav", RATE, pcm)
    w = read_audio(tmp_path / "x.wav")
    assert w.sample_rate == RATE
    assert len(w.samples) == 5
    assert np.allclose(w.samples, pcm / 32768.0, atol=1e-7)


def test_read_resamples_48k(tmp_path):
    t = np.arange(48000) / 48000
    pcm = (0.4 * np.sin(2 * np.pi * 440 * t) * 32767).astype(np.int16)
    wavfile.write(tmp_path / "x.wav", 48000, pcm)
    w = read_audio(tmp_path / "x.wav")
    assert w.sample_rate == RATE
    assert abs(len(w.samples) - 16000) <= 1


def test_read_stereo_identical_channels_equals_mono(tmp_path):
    mono = (tone(220, 0.5) * 32767).astype(np.int16)
    wavfile.write(tmp_path / "m.wav", RATE, mono)
    wavfile.write(tmp_path / "s.wav", RATE, np.stack([mono, mono], axis=1))
    a = read_audio(tmp_path / "m.wav").samples
    b = read_audio(tmp_path / "s.wav").samples
    assert np.allclose(a, b, atol=1e-7)


def test_read_float32_passthrough(tmp_path):
    data = tone(300, 0.25)
    wavfile.write(tmp_path / "f.wav", RATE, data)
    w = read_audio(tmp_path / "f.wav")
    assert np.allclose(w.samples, data, atol=1e-7)


def test_read_malformed_and_unsupported(tmp_path):
    bad = tmp_path / "bad.wav"
    bad.write_bytes(b"not a riff file at all")
    with pytest.raises(FormatError):
        read_audio(bad)
    pcm8 = (np.abs(tone(100, 0.1)) * 255).astype(np.uint8)
    wavfile.write(tmp_path / "u8.wav", RATE, pcm8)
    with pytest.raises(UnsupportedError):
        read_audio(tmp_path / "u8.wav")


def test_pad_or_trim_policies():
    short = wave(tone(100, 10))
    padded = pad_or_trim(short)
    assert len(padded.samples) == 240000
    assert np.array_equal(padded.samples[: len(short.samples)], short.samples)
    assert np.all(padded.samples[len(short.samples):] == 0)

    long = wave(tone(100, 20))
    trimmed = pad_or_trim(long)
    assert len(trimmed.samples) == 240000
    assert np.array_equal(trimmed.samples, long.samples[:240000])

    exact = wave(tone(100, 15))
    assert pad_or_trim(exact).samples.tobytes() == exact.samples.tobytes()


def test_write_read_round_trip(tmp_path):
    w = wave(tone(150, 0.3))
    write_wav(tmp_path / "w.wav", w)
    back = read_audio(tmp_path / "w.wav")
    assert np.abs(back.samples - w.samples).max() < 1e-3


# ---------------------------------------------------------------------------
# mel spectrogram
# ---------------------------------------------------------------------------


def test_mel_shape_for_15s():
    spec = mel_spectrogram(pad_or_trim(wave(tone(440, 3))))
    assert spec.values.shape == (64, 1498)


def test_mel_frame_count_formula():
    cfg = MelConfig()
    for n in (400, 401, 799, 800, 1234, 16000):
        spec = mel_spectrogram(wave(np.ones(n, dtype=np.float32) * 0.1), cfg)
        assert spec.n_frames == 1 + (n - 400) // 160


def test_mel_silence_saturates_at_floor():
    spec = mel_spectrogram(wave(np.zeros(8000, dtype=np.float32)))
    assert np.allclose(spec.values, np.log(1e-10))


def test_mel_all_entries_at_least_floor():
    spec = mel_spectrogram(wave(tone(523, 1.0)))
    assert (spec.values >= np.log(1e-10) - 1e-6).all()


def test_mel_tone_peaks_at_nearest_center_bin():
    cfg = MelConfig()
    spec = mel_spectrogram(wave(tone(1000, 1.0, amp=0.5)), cfg)
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.f_min), hz_to_mel(cfg.f_max), cfg.n_mels + 2))
    centers = edges[1:-1]
    expected = int(np.argmin(np.abs(centers - 1000.0)))
    per_frame = spec.values.argmax(axis=0)
    assert (per_frame == expected).mean() > 0.95


def test_mel_too_short_input():
    with pytest.raises(InputTooShort):
        mel_spectrogram(wave(np.ones(399, dtype=np.float32)))


def test_filterbank_geometry():
    cfg = MelConfig()
    bank = mel_filterbank(cfg, RATE)
    assert bank.shape == (64, 257)
    assert (bank.sum(axis=1) > 0).all()
    freqs = np.arange(257) * (RATE / 512)
    inside = (freqs > cfg.f_min) & (freqs < cfg.f_max)
    assert (bank.sum(axis=0)[inside] > 0).all()


def test_mel_deterministic():
    w = wave(tone(800, 0.5))
    a = mel_spectrogram(w).values.tobytes()
    b = mel_spectrogram(w).values.tobytes()
    assert a == b


# ---------------------------------------------------------------------------
# pitch
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("freq,lo,hi", [(100, 97, 103), (200, 195, 205), (440, 430, 450)])
def test_estimate_f0_pure_tones(freq, lo, hi):
    f0, voiced = estimate_f0(tone(freq, 0.05, amp=0.4)[:800], RATE)
    assert voiced
    assert lo <= f0 <= hi


def test_estimate_f0_silence_unvoiced():
    f0, voiced = estimate_f0(np.zeros(800), RATE)
    assert not voiced and f0 == 0.0


def test_estimate_f0_noise_mostly_unvoiced():
    rng = np.random.default_rng(0)
    voiced = [estimate_f0(rng.normal(scale=0.3, size=480), RATE)[1] for _ in range(50)]
    assert np.mean(voiced) < 0.3


# ---------------------------------------------------------------------------
# paralinguistic vector
# ---------------------------------------------------------------------------


def _feature(vec, name):
    return float(vec[PARA_FEATURE_NAMES.index(name)])


def test_para_vector_200hz_tone():
    vec = paralinguistic_vector(wave(tone(200, 1.0, amp=0.4)))
    assert vec.shape == (42,)
    f0_mean = np.exp(_feature(vec, "log_f0_mean"))
    assert 195 <= f0_mean <= 205
    assert _feature(vec, "voicing_mean") > 0.9
    assert _feature(vec, "jitter_mean") < 0.01


def test_para_vector_noise_vs_tone_zcr_and_voicing():
    rng = np.random.default_rng(1)
    noise = rng.normal(scale=0.2, size=RATE).astype(np.float32)
    v_noise = paralinguistic_vector(wave(noise))
    v_tone = paralinguistic_vector(wave(tone(200, 1.0, amp=0.4)))
    assert _feature(v_noise, "voicing_mean") < 0.3
    assert _feature(v_noise, "zcr_mean") > _feature(v_tone, "zcr_mean")


def test_para_vector_silence_degenerate():
    vec = paralinguistic_vector(wave(np.zeros(RATE, dtype=np.float32)))
    assert np.isfinite(vec).all()
    assert _feature(vec, "voicing_mean") == 0.0
    for fn in ("mean", "std", "p20", "p50", "p80"):
        assert _feature(vec, f"rms_{fn}") == 0.0


def test_para_vector_too_short():
    with pytest.raises(InputTooShort):
        paralinguistic_vector(wave(np.zeros(800, dtype=np.float32)))


def test_para_scaling_invariances():
    base = tone(200, 0.8, amp=0.2)
    v1 = paralinguistic_vector(wave(base))
    v4 = paralinguistic_vector(wave(4.0 * base))  # power-of-two: exact in fp
    for name in PARA_FEATURE_NAMES:
        a, b = _feature(v1, name), _feature(v4, name)
        if name.startswith(("log_f0", "voicing", "zcr", "centroid", "rolloff85")) or \
           name in ("jitter_mean", "shimmer_mean"):
            assert a == pytest.approx(b, abs=1e-4), name
        elif name.startswith(("rms", "flux")):
            assert b == pytest.approx(4.0 * a, rel=1e-4), name


def test_para_deterministic():
    w = wave(tone(313, 0.7, amp=0.3))
    assert paralinguistic_vector(w).tobytes() == paralinguistic_vector(w).tobytes()
