"""Spectral and paralinguistic feature extraction.

Two views come out of raw audio here: log-mel spectrograms (framed STFT
power through a triangular mel filterbank) and a 42-dimensional
utterance-level descriptor vector built from frame-wise low-level
descriptors aggregated by five functionals, plus jitter and shimmer means.
The descriptor set is a compact stand-in for a full 88-feature reference
extractor; the real thing can be ingested through the same manifest/MVF
path when available.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .audio import Waveform
from .errors import ContractError, InputTooShort

LOG10_MEL = 2595.0
F0_MIN, F0_MAX = 60.0, 500.0
VOICING_THRESHOLD = 0.45


@dataclass
class MelConfig:
    win_ms: float = 25.0
    hop_ms: float = 10.0
    n_mels: int = 64
    f_min: float = 60.0
    f_max: float = 7800.0
    n_fft: int = 512
    log_floor: float = 1e-10

    def win_samples(self, rate: int) -> int:
        return int(round(self.win_ms * rate / 1000.0))

    def hop_samples(self, rate: int) -> int:
        return int(round(self.hop_ms * rate / 1000.0))


@dataclass
class MelSpec:
    values: np.ndarray  # (n_mels, n_frames) natural-log energies
    rate: int
    hop_samples: int
    win_samples: int

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def hz_to_mel(f):
    return LOG10_MEL * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / LOG10_MEL) - 1.0)


def mel_filterbank(cfg: MelConfig, rate: int) -> np.ndarray:
    """Triangular filters on the HTK mel scale, shape (n_mels, n_fft//2 + 1)."""
    if not 0 <= cfg.f_min < cfg.f_max <= rate / 2:
        raise ContractError(f"mel band [{cfg.f_min}, {cfg.f_max}] invalid for rate {rate}")
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.f_min), hz_to_mel(cfg.f_max), cfg.n_mels + 2))
    freqs = np.arange(cfg.n_fft // 2 + 1) * (rate / cfg.n_fft)
    bank = np.zeros((cfg.n_mels, len(freqs)))
    for m in range(cfg.n_mels):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs - left) / (center - left)
        down = (right - freqs) / (right - center)
        bank[m] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def _frame(samples: np.ndarray, win: int, hop: int) -> np.ndarray:
    n_frames = 1 + (len(samples) - win) // hop
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    return samples[idx]


def _hann(win: int) -> np.ndarray:
    # periodic Hann, the usual STFT analysis window
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(win) / win)


def mel_spectrogram(wave: Waveform, cfg: MelConfig | None = None) -> MelSpec:
    """Log-mel energies; frame count is 1 + floor((n_samples - win) / hop)."""
    cfg = cfg or MelConfig()
    win = cfg.win_samples(wave.sample_rate)
    hop = cfg.hop_samples(wave.sample_rate)
    if len(wave.samples) < win:
        raise InputTooShort(f"need at least {win} samples, got {len(wave.samples)}")
    if cfg.n_fft < win:
        raise ContractError(f"n_fft {cfg.n_fft} shorter than window {win}")
    frames = _frame(wave.samples.astype(np.float64), win, hop) * _hann(win)
    power = np.abs(np.fft.rfft(frames, n=cfg.n_fft, axis=1)) ** 2
    mel = power @ mel_filterbank(cfg, wave.sample_rate).T
    values = np.log(np.maximum(mel, cfg.log_floor)).T
    return MelSpec(values=values.astype(np.float32), rate=wave.sample_rate,
                   hop_samples=hop, win_samples=win)


# ---------------------------------------------------------------------------
# paralinguistic descriptor vector
# ---------------------------------------------------------------------------

_LLD_NAMES = ("log_f0", "voicing", "rms", "zcr", "centroid", "rolloff85", "flux", "hnr")
_FUNCTIONALS = ("mean", "std", "p20", "p50", "p80")

PARA_FEATURE_NAMES: tuple[str, ...] = tuple(
    f"{lld}_{fn}" for lld in _LLD_NAMES for fn in _FUNCTIONALS
) + ("jitter_mean", "shimmer_mean")

PARA_DIM = len(PARA_FEATURE_NAMES)  # 42


def estimate_f0(frame: np.ndarray, rate: int = 16000) -> tuple[float, bool]:
    """Autocorrelation pitch for one frame: (f0 in Hz, voiced flag).

    Searches lags for 60-500 Hz; a frame is voiced when the normalized
    autocorrelation peak reaches 0.45. Among near-tied peaks the shortest
    lag wins, which avoids octave-down errors on periodic signals.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if len(frame) < 400:
        raise ContractError(f"estimate_f0 needs >= 400 samples, got {len(frame)}")
    frame = frame - frame.mean()
    energy = float(frame @ frame)
    if energy < 1e-12:
        return 0.0, False
    lag_min = int(rate / F0_MAX)
    lag_max = min(int(rate / F0_MIN), len(frame) - 2)
    lags = np.arange(lag_min, lag_max + 1)

    n = len(frame)
    # linear autocorrelation via FFT (zero padding avoids circular wrap)
    size = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(frame, size)
    corr = np.fft.irfft(spec * np.conj(spec), size)[:n]
    sq = np.concatenate([[0.0], np.cumsum(frame * frame)])
    e_head = sq[n - lags] - sq[0]       # energy of frame[:n-lag]
    e_tail = sq[n] - sq[lags]           # energy of frame[lag:]
    denom = np.sqrt(e_head * e_tail)
    r = np.where(denom > 1e-12, corr[lags] / np.maximum(denom, 1e-12), 0.0)

    r_max = float(r.max())
    if r_max < VOICING_THRESHOLD:
        return 0.0, False
    # shortest local maximum within 10% of the global peak
    best = None
    for i in range(len(r)):
        left = r[i - 1] if i > 0 else -np.inf
        right = r[i + 1] if i < len(r) - 1 else -np.inf
        if r[i] >= 0.9 * r_max and r[i] >= left and r[i] >= right:
            best = i
            break
    if best is None:
        best = int(np.argmax(r))
    lag = float(lags[best])
    if 0 < best < len(r) - 1:  # parabolic refinement
        y0, y1, y2 = r[best - 1], r[best], r[best + 1]
        denom_p = y0 - 2.0 * y1 + y2
        if abs(denom_p) > 1e-12:
            delta = 0.5 * (y0 - y2) / denom_p
            lag += float(np.clip(delta, -0.5, 0.5))
    return rate / lag, True


def _functionals(series: np.ndarray) -> list[float]:
    if len(series) == 0:
        return [0.0] * len(_FUNCTIONALS)
    return [
        float(np.mean(series)),
        float(np.std(series)),
        float(np.percentile(series, 20)),
        float(np.percentile(series, 50)),
        float(np.percentile(series, 80)),
    ]


def paralinguistic_vector(wave: Waveform, win_ms: float = 25.0, hop_ms: float = 10.0) -> np.ndarray:
    """42 utterance-level features (see PARA_FEATURE_NAMES for the order).

    Frame-wise LLDs aggregated by {mean, std, p20, p50, p80}; pitch-derived
    LLDs (log-F0, jitter, shimmer, HNR) use voiced frames only and are zero
    when nothing is voiced.
    """
    rate = wave.sample_rate
    win = int(round(win_ms * rate / 1000.0))
    hop = int(round(hop_ms * rate / 1000.0))
    if len(wave.samples) < max(win, int(0.1 * rate)):
        raise InputTooShort(f"need at least 100 ms of audio, got {len(wave.samples)} samples")
    frames = _frame(wave.samples.astype(np.float64), win, hop)
    n_frames = len(frames)

    windowed = frames * _hann(win)
    spectra = np.abs(np.fft.rfft(windowed, axis=1))
    freqs = np.arange(spectra.shape[1]) * (rate / win)
    power = spectra ** 2
    total = power.sum(axis=1)

    rms = np.sqrt((frames ** 2).mean(axis=1))
    zcr = (np.abs(np.diff(np.signbit(frames).astype(np.int8), axis=1)) > 0).mean(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        centroid = np.where(total > 1e-20, (power * freqs).sum(axis=1) / total, 0.0)
    cum = np.cumsum(power, axis=1)
    rolloff = np.zeros(n_frames)
    nonzero = total > 1e-20
    if nonzero.any():
        hit = cum[nonzero] >= 0.85 * total[nonzero, None]
        rolloff[nonzero] = freqs[hit.argmax(axis=1)]
    flux = np.zeros(n_frames)
    if n_frames > 1:
        flux[1:] = np.linalg.norm(np.diff(spectra, axis=0), axis=1)

    f0 = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    hnr = np.zeros(n_frames)
    for i in range(n_frames):
        hz, v = estimate_f0(frames[i], rate)
        if v:
            f0[i] = hz
            voiced[i] = True
            # harmonics-to-noise from the autocorrelation peak height
            r = _peak_autocorr(frames[i], hz, rate)
            r = min(max(r, 1e-6), 1.0 - 1e-6)
            hnr[i] = float(np.clip(10.0 * np.log10(r / (1.0 - r)), -20.0, 40.0))

    v_idx = np.flatnonzero(voiced)
    feats: list[float] = []
    feats += _functionals(np.log(f0[v_idx]) if len(v_idx) else np.array([]))
    feats += _functionals(voiced.astype(np.float64))
    feats += _functionals(rms)
    feats += _functionals(zcr)
    feats += _functionals(centroid)
    feats += _functionals(rolloff)
    feats += _functionals(flux)
    feats += _functionals(hnr[v_idx] if len(v_idx) else np.array([]))

    jitter = shimmer = 0.0
    runs = _consecutive_pairs(v_idx)
    if runs:
        periods = 1.0 / f0[v_idx]
        pos = {int(idx): k for k, idx in enumerate(v_idx)}
        dp = [abs(periods[pos[b]] - periods[pos[a]]) for a, b in runs]
        jitter = float(np.mean(dp) / np.mean(periods))
        amps = rms[v_idx]
        if np.mean(amps) > 1e-12:
            da = [abs(amps[pos[b]] - amps[pos[a]]) for a, b in runs]
            shimmer = float(np.mean(da) / np.mean(amps))
    feats += [jitter, shimmer]

    out = np.asarray(feats, dtype=np.float32)
    assert out.shape == (PARA_DIM,)
    return out


def _peak_autocorr(frame: np.ndarray, f0_hz: float, rate: int) -> float:
    frame = frame - frame.mean()
    lag = int(round(rate / f0_hz))
    lag = min(max(lag, 1), len(frame) - 2)
    head, tail = frame[: len(frame) - lag], frame[lag:]
    denom = np.sqrt(float(head @ head) * float(tail @ tail))
    return float((head @ tail) / denom) if denom > 1e-12 else 0.0


def _consecutive_pairs(idx: np.ndarray) -> list[tuple[int, int]]:
    return [(int(idx[k]), int(idx[k + 1])) for k in range(len(idx) - 1)
            if idx[k + 1] == idx[k] + 1]


def write_para_csv(path, rows: dict[str, np.ndarray]) -> None:
    """CSV export with a fixed header naming all 42 features."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", *PARA_FEATURE_NAMES])
        for rid in sorted(rows):
            writer.writerow([rid, *(repr(float(v)) for v in rows[rid])])
