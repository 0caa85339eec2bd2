"""The pairwise multi-view contrastive objective.

For each anchor instance in one view, the positive candidate is the same
instance in another view and the negatives are the remaining instances of
that other view; the candidate pool never includes same-view vectors. The
per-anchor loss is a temperature-scaled softmax cross-entropy over cosine
similarities, summed in both directions per view pair and averaged over all
view pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import ContractError, ShapeError
from .tensor import (
    Tensor,
    add,
    l2_normalize_rows,
    log_sum_exp_rows,
    matmul,
    mean_all,
    scale,
    sub,
    take_diag,
    transpose,
)

TEMPERATURE_GRID = (0.1, 0.25, 0.5, 1.0)


@dataclass
class ContrastiveConfig:
    temperature: float = 0.5
    grid: tuple[float, ...] = field(default=TEMPERATURE_GRID)

    def __post_init__(self):
        if self.temperature <= 0:
            raise ContractError(f"temperature must be positive, got {self.temperature}")


def _check_pair(zi: Tensor, zj: Tensor):
    if zi.data.ndim != 2 or zj.data.ndim != 2 or zi.shape != zj.shape:
        raise ShapeError(f"projected views must share an NxD shape, got {zi.shape} vs {zj.shape}")


def cosine_similarity_matrix(zi: Tensor, zj: Tensor) -> Tensor:
    """S[a, b] = cosine similarity of row a of ``zi`` with row b of ``zj``."""
    _check_pair(zi, zj)
    return matmul(l2_normalize_rows(zi), transpose(l2_normalize_rows(zj)))


def nt_xent_directed(zi: Tensor, zj: Tensor, tau: float) -> Tensor:
    """Per-anchor losses with view ``i`` as anchor and view ``j`` as candidates.

    l[a] = -log( exp(S[a,a]/tau) / sum_k exp(S[a,k]/tau) ), evaluated via
    log-sum-exp so small temperatures do not overflow.
    """
    _check_pair(zi, zj)
    if tau <= 0:
        raise ContractError(f"temperature must be positive, got {tau}")
    logits = scale(cosine_similarity_matrix(zi, zj), 1.0 / tau)
    return sub(log_sum_exp_rows(logits), take_diag(logits))


def pair_loss(zi: Tensor, zj: Tensor, tau: float) -> Tensor:
    """Batch loss for one view pair: mean over anchors of both directions."""
    both = add(nt_xent_directed(zi, zj, tau), nt_xent_directed(zj, zi, tau))
    return mean_all(both)


def pairwise_multiview_loss(views: Sequence[Tensor], tau: float) -> Tensor:
    """Average of the directed pair losses over all ordered view pairs.

    Both directions of each unordered pair contribute, while the divisor is
    the number of unordered pairs K*(K-1)/2, so the result equals twice the
    mean of the unordered pair losses.
    """
    k = len(views)
    if k < 2:
        raise ContractError(f"need at least two views, got {k}")
    total = None
    for i in range(k):
        for j in range(i + 1, k):
            lij = pair_loss(views[i], views[j], tau)
            # the j->i ordered term equals l_ij bit-for-bit, so add it twice
            contrib = add(lij, lij)
            total = contrib if total is None else add(total, contrib)
    n_pairs = k * (k - 1) // 2
    return scale(total, 1.0 / n_pairs)
