"""Contrastive objective against scalar brute-force oracles and closed forms."""

import math

import numpy as np
import pytest

from pairview.contrastive import (
    cosine_similarity_matrix,
    nt_xent_directed,
    pair_loss,
    pairwise_multiview_loss,
)
from pairview.errors import ContractError, ShapeError
from pairview.tensor import Parameter, Tensor, grad_check, mean_all

from oracles import (
    cosine_matrix_oracle,
    multiview_loss_oracle,
    nt_xent_oracle,
    pair_loss_oracle,
)

TAUS = (0.1, 0.25, 0.5, 1.0)


def _t(arr):
    return Tensor(np.asarray(arr, dtype=np.float64))


def test_cosine_identity_rows():
    eye = np.eye(3)
    s = cosine_similarity_matrix(_t(eye), _t(eye)).data
    assert np.allclose(s, np.eye(3), atol=1e-7)


def test_cosine_scale_invariance():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(4, 6))
    s1 = cosine_similarity_matrix(_t(z), _t(z)).data
    s2 = cosine_similarity_matrix(_t(5.0 * z), _t(z)).data
    assert np.allclose(s1, s2, atol=1e-7)


def test_cosine_matches_scalar_oracle():
    rng = np.random.default_rng(1)
    zi, zj = rng.normal(size=(4, 8)), rng.normal(size=(4, 8))
    got = cosine_similarity_matrix(_t(zi), _t(zj)).data
    assert np.abs(got - cosine_matrix_oracle(zi, zj)).max() < 1e-6


def test_cosine_shape_error():
    with pytest.raises(ShapeError):
        cosine_similarity_matrix(_t(np.zeros((3, 4))), _t(np.zeros((2, 4))))


def test_nt_xent_single_instance_is_zero():
    rng = np.random.default_rng(2)
    z = rng.normal(size=(1, 5))
    for tau in TAUS:
        out = nt_xent_directed(_t(z), _t(rng.normal(size=(1, 5))), tau).data
        assert out.shape == (1,)
        assert out[0] == 0.0


def test_nt_xent_closed_form_two_orthogonal():
    z = np.array([[1.0, 0.0], [0.0, 1.0]])
    losses = nt_xent_directed(_t(z), _t(z), 0.5).data
    expected = math.log(1.0 + math.exp(-2.0))
    assert np.abs(losses - expected).max() < 1e-9


def test_nt_xent_rejects_bad_temperature():
    z = _t(np.ones((2, 3)))
    with pytest.raises(ContractError):
        nt_xent_directed(z, z, 0.0)


@pytest.mark.parametrize("tau", TAUS)
def test_nt_xent_matches_bruteforce(tau):
    rng = np.random.default_rng(int(tau * 100))
    for _ in range(10):
        n, d = rng.integers(2, 9), rng.integers(2, 17)
        zi, zj = rng.normal(size=(n, d)), rng.normal(size=(n, d))
        got = nt_xent_directed(_t(zi), _t(zj), tau).data
        want = nt_xent_oracle(zi, zj, tau)
        assert np.abs(got - want).max() < 1e-6
        assert np.isfinite(got).all()
        assert (got >= -1e-12).all()


def test_pair_loss_symmetry_bitwise():
    rng = np.random.default_rng(3)
    zi, zj = rng.normal(size=(5, 7)), rng.normal(size=(5, 7))
    lij = pair_loss(_t(zi), _t(zj), 0.25).item()
    lji = pair_loss(_t(zj), _t(zi), 0.25).item()
    assert lij == lji


def test_pair_loss_closed_form():
    z = np.array([[1.0, 0.0], [0.0, 1.0]])
    got = pair_loss(_t(z), _t(z), 0.5).item()
    assert abs(got - 2.0 * math.log(1.0 + math.exp(-2.0))) < 1e-7


def test_pair_loss_matches_composed_oracle():
    rng = np.random.default_rng(4)
    for tau in TAUS:
        zi, zj = rng.normal(size=(6, 4)), rng.normal(size=(6, 4))
        got = pair_loss(_t(zi), _t(zj), tau).item()
        assert abs(got - pair_loss_oracle(zi, zj, tau)) < 1e-6


def test_multiview_k2_equals_twice_pair_loss():
    rng = np.random.default_rng(5)
    zs = [rng.normal(size=(4, 5)) for _ in range(2)]
    total = pairwise_multiview_loss([_t(z) for z in zs], 0.5).item()
    single = pair_loss(_t(zs[0]), _t(zs[1]), 0.5).item()
    assert abs(total - 2.0 * single) < 1e-12


def test_multiview_identical_views_collapse():
    rng = np.random.default_rng(6)
    z = rng.normal(size=(4, 5))
    total = pairwise_multiview_loss([_t(z)] * 3, 0.5).item()
    pair = pair_loss(_t(z), _t(z), 0.5).item()
    assert abs(total - 2.0 * pair) < 1e-12


def test_multiview_k3_matches_enumeration_oracle():
    rng = np.random.default_rng(7)
    for tau in TAUS:
        zs = [rng.normal(size=(5, 6)) for _ in range(3)]
        got = pairwise_multiview_loss([_t(z) for z in zs], tau).item()
        assert abs(got - multiview_loss_oracle(zs, tau)) < 1e-6


def test_multiview_needs_two_views():
    with pytest.raises(ContractError):
        pairwise_multiview_loss([_t(np.ones((3, 4)))], 0.5)


def test_loss_invariant_to_row_normalisation():
    rng = np.random.default_rng(8)
    zs = [rng.normal(size=(5, 6)) for _ in range(3)]
    normed = [z / np.linalg.norm(z, axis=1, keepdims=True) for z in zs]
    raw = pairwise_multiview_loss([_t(z) for z in zs], 0.5).item()
    unit = pairwise_multiview_loss([_t(z) for z in normed], 0.5).item()
    assert abs(raw - unit) < 1e-6


def test_temperature_monotonicity_both_regimes():
    # positive is the argmax with margin: the loss is log sum exp((s_k - s_pos)/tau)
    # with negative exponents, so shrinking tau strictly shrinks the loss;
    # with a negative above the positive, shrinking tau strictly grows it.
    rng = np.random.default_rng(9)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    aligned = np.array([[1.0, 0.1, 0.0], [0.1, 1.0, 0.1], [0.0, 0.1, 1.0]])
    confused = np.array([[0.2, 1.0, 0.0], [1.0, 0.2, 0.1], [0.0, 0.1, 1.0]])
    taus = (1.0, 0.5, 0.25, 0.1)
    good = [pair_loss(_t(q), _t(aligned @ q), tau).item() for tau in taus]
    bad = [pair_loss(_t(q), _t(confused @ q), tau).item() for tau in taus]
    assert all(a > b for a, b in zip(good, good[1:]))  # decreasing tau -> lower loss
    assert all(a < b for a, b in zip(bad, bad[1:]))    # decreasing tau -> higher loss


def test_gradient_through_loss_matches_finite_differences():
    rng = np.random.default_rng(10)
    zi = Parameter("zi", rng.normal(size=(4, 5)))
    zj = Parameter("zj", rng.normal(size=(4, 5)))
    err = grad_check(lambda: pair_loss(zi, zj, 0.5), [zi, zj], h=1e-4)
    assert err < 1e-4


def test_loss_positive_and_bounded_by_softmax_bound():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n, d = rng.integers(2, 7), rng.integers(2, 9)
        zi, zj = rng.normal(size=(n, d)), rng.normal(size=(n, d))
        losses = nt_xent_directed(_t(zi), _t(zj), 0.5).data
        assert (losses >= -1e-12).all()
