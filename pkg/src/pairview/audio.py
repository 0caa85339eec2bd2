"""WAV reading, resampling, and the fixed-length padding policy."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import FormatError, UnsupportedError

TARGET_RATE = 16000
TARGET_SECONDS = 15.0


@dataclass
class Waveform:
    samples: np.ndarray  # float32 in [-1, 1]
    sample_rate: int

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


_SCALES = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.float32): 1.0,
    np.dtype(np.float64): 1.0,
}


def read_audio(path) -> Waveform:
    """Read a PCM WAV file as mono float32 at 16 kHz.

    Multichannel input is channel-averaged; sources at other rates are
    resampled with a polyphase windowed-sinc filter.
    """
    try:
        rate, raw = wavfile.read(path)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e
    if raw.dtype not in _SCALES:
        raise UnsupportedError(f"{path}: unsupported sample format {raw.dtype}")
    data = raw.astype(np.float64) / _SCALES[raw.dtype]
    if data.ndim == 2:
        data = data.mean(axis=1)
    if rate != TARGET_RATE:
        ratio = Fraction(TARGET_RATE, int(rate))
        data = resample_poly(data, ratio.numerator, ratio.denominator)
    return Waveform(samples=data.astype(np.float32), sample_rate=TARGET_RATE)


def pad_or_trim(wave: Waveform, target_seconds: float = TARGET_SECONDS) -> Waveform:
    """Force exactly target_seconds: truncate the tail or zero-pad the tail."""
    n = int(round(target_seconds * wave.sample_rate))
    s = wave.samples
    if len(s) > n:
        s = s[:n]
    elif len(s) < n:
        s = np.concatenate([s, np.zeros(n - len(s), dtype=s.dtype)])
    return Waveform(samples=s, sample_rate=wave.sample_rate)


def write_wav(path, wave: Waveform) -> None:
    """16-bit PCM writer used by the demos and tests."""
    pcm = np.clip(wave.samples, -1.0, 1.0)
    wavfile.write(path, wave.sample_rate, (pcm * 32767.0).astype(np.int16))
