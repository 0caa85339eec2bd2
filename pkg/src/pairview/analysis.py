"""Representation alignment scoring and the experiment statistics.

CCA whitens both representation matrices through truncated SVDs and reads
the canonical correlations off the cross-correlation of the whitened
coordinates. The projection-weighted summary weights each canonical
correlation by how strongly its canonical variate projects onto the first
view's (centered) features, so directions that dominate the first view's
geometry count more.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats

from .errors import ContractError, DegenerateInputError
from .mvf import mvf_write
from .tensor import Tensor, no_grad


@dataclass
class AlignmentReport:
    correlations: np.ndarray  # descending canonical correlations
    weights: np.ndarray       # normalized projection weights, same length
    score: float              # sum(weights * correlations)
    rank: int                 # components kept after whitening


@dataclass
class SignificanceResult:
    u: float
    p_value: float
    method: str  # "exact" | "normal-approx"
    alpha: float = 0.05

    @property
    def significant(self) -> bool:
        return self.p_value < self.alpha


def _whiten(m: np.ndarray, rank_tol: float, side: str):
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s[0] < 1e-10 * (1.0 + np.abs(m).max()):
        raise DegenerateInputError(f"{side} input has zero variance")
    keep = s > rank_tol * s[0]
    return u[:, keep], s[keep], vt[keep]


def cca(x: np.ndarray, y: np.ndarray, rank_tol: float = 1e-6):
    """Canonical correlations and directions for two (N x d) matrices.

    Returns (rho, wx, wy): rho descending in [0, 1]; the canonical variates
    are (x - mean(x)) @ wx and (y - mean(y)) @ wy.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ContractError(f"need two N x d matrices with shared N, got {x.shape}, {y.shape}")
    if x.shape[0] < 2:
        raise ContractError("need at least 2 rows")
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    ux, sx, vxt = _whiten(xc, rank_tol, "first")
    uy, sy, vyt = _whiten(yc, rank_tol, "second")
    um, rho, vmt = np.linalg.svd(ux.T @ uy, full_matrices=False)
    rho = np.clip(rho, 0.0, 1.0)
    wx = vxt.T @ ((1.0 / sx)[:, None] * um)
    wy = vyt.T @ ((1.0 / sy)[:, None] * vmt.T)
    return rho, wx, wy


def pwcca(x: np.ndarray, y: np.ndarray, rank_tol: float = 1e-6) -> AlignmentReport:
    """Projection-weighted canonical correlation between two rep matrices.

    The first argument is the weighting view: weights come from the absolute
    projections of the canonical variates onto its centered feature columns.
    The score is therefore not symmetric in its arguments.
    """
    rho, wx, _ = cca(x, y, rank_tol)
    xc = np.asarray(x, dtype=np.float64) - np.asarray(x, dtype=np.float64).mean(axis=0)
    variates = xc @ wx  # (N, k)
    raw = np.abs(variates.T @ xc).sum(axis=1)
    total = raw.sum()
    if total <= 0:
        raise DegenerateInputError("projection weights vanished")
    weights = raw / total
    return AlignmentReport(
        correlations=rho,
        weights=weights,
        score=float(weights @ rho),
        rank=len(rho),
    )


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------


def _rankdata(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


@lru_cache(maxsize=None)
def _u_count(n1: int, n2: int, u: int) -> int:
    """Number of arrangements of n1 + n2 distinct values with statistic u."""
    if u < 0 or u > n1 * n2:
        return 0
    if n1 == 0 or n2 == 0:
        return 1 if u == 0 else 0
    return _u_count(n1 - 1, n2, u - n2) + _u_count(n1, n2 - 1, u)


def _exact_two_sided(n1: int, n2: int, u: float) -> float:
    total = 1.0
    for k in range(1, n1 + 1):  # C(n1+n2, n1)
        total = total * (n2 + k) / k
    u_small = min(u, n1 * n2 - u)
    cum = sum(_u_count(n1, n2, k) for k in range(int(np.floor(u_small)) + 1))
    return min(1.0, 2.0 * cum / total)


def mann_whitney_u(a, b, method: str = "auto") -> SignificanceResult:
    """Two-sided Mann-Whitney U test.

    The exact null distribution (no ties) is used when n1 + n2 <= 16, a
    tie-corrected normal approximation with continuity correction otherwise.
    ``method`` can force "exact" (rejects tied data) or "normal".
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ContractError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    ranks = _rankdata(pooled)
    r1 = ranks[:n1].sum()
    u = r1 - n1 * (n1 + 1) / 2.0  # number of (a, b) pairs with a > b, ties half

    has_ties = len(np.unique(pooled)) != len(pooled)
    if method == "exact" and has_ties:
        raise ContractError("exact method requires tie-free samples")
    use_exact = method == "exact" or (method == "auto" and not has_ties and n1 + n2 <= 16)
    if method not in ("auto", "exact", "normal"):
        raise ContractError(f"unknown method {method!r}")

    if use_exact:
        return SignificanceResult(u=float(u), p_value=_exact_two_sided(n1, n2, u), method="exact")

    n = n1 + n2
    mu = n1 * n2 / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = (counts.astype(np.float64) ** 3 - counts).sum()
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return SignificanceResult(u=float(u), p_value=1.0, method="normal-approx")
    z = (abs(u - mu) - 0.5) / np.sqrt(var)
    p = min(1.0, 2.0 * float(stats.norm.sf(z)))
    return SignificanceResult(u=float(u), p_value=p, method="normal-approx")


def mean_ci95(samples) -> tuple[float, float]:
    """Mean and Student-t 95% half-width over the samples."""
    samples = np.asarray(samples, dtype=np.float64)
    n = len(samples)
    if n < 2:
        raise ContractError("need at least 2 samples for a confidence interval")
    if np.ptp(samples) == 0:
        return float(samples[0]), 0.0
    mult = float(stats.t.ppf(0.975, n - 1))
    half = mult * samples.std(ddof=1) / np.sqrt(n)
    return float(samples.mean()), float(half)


def export_representations(encoder, manifest, records, view: str, path) -> np.ndarray:
    """Encode one view of the given records and write the N x D matrix as MVF."""
    from .data import load_view_matrix  # local import to avoid a cycle

    block = load_view_matrix(manifest, records, view)
    reps = []
    with no_grad():
        for start in range(0, len(records), 256):
            chunk = Tensor(block[start : start + 256])
            reps.append(encoder.forward(chunk).data)
    out = np.concatenate(reps, axis=0) if reps else np.zeros((0, 128), dtype=np.float32)
    mvf_write(path, out)
    return out
