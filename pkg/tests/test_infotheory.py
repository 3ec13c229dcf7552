import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from wiretap_chain.channel import CascadeSpec, bsc, bsc_cascade, from_cascade
from wiretap_chain.errors import NoSecrecyError, ValidationError
from wiretap_chain.infotheory import (
    GaussianWiretapParams,
    InputDistribution,
    channel_mi,
    conditional_mi,
    entropy,
    gaussian_rates,
    h2,
    lambda_from_rates,
    mutual_information,
    rate_profile,
    simplex_grid,
)


def star(p, q):
    return p * (1 - q) + q * (1 - p)


def test_mi_of_product_is_zero():
    pa = np.array([0.3, 0.7])
    pb = np.array([0.2, 0.5, 0.3])
    assert mutual_information(np.outer(pa, pb)) == pytest.approx(0.0, abs=1e-12)


def test_mi_of_copied_bit_is_one():
    assert mutual_information([[0.5, 0.0], [0.0, 0.5]]) == pytest.approx(1.0, abs=1e-12)


def test_mi_hand_computed():
    # 0.8 log2(1.6) + 0.2 log2(0.4)
    assert mutual_information([[0.4, 0.1], [0.1, 0.4]]) == pytest.approx(0.2781, abs=1e-4)


@pytest.mark.parametrize("bad", [[[0.5, 0.5], [0.5, 0.5]], [[1.2, -0.2], [0.0, 0.0]]])
def test_mi_rejects_bad_joints(bad):
    with pytest.raises(ValidationError):
        mutual_information(bad)


def test_cmi_conditionally_independent():
    pc = np.array([0.4, 0.6])
    joint = np.stack([np.outer([0.2, 0.8], [0.5, 0.5]), np.outer([0.7, 0.3], [0.1, 0.9])], axis=-1)
    joint = joint * pc
    assert conditional_mi(joint) == pytest.approx(0.0, abs=1e-12)


def test_cmi_with_constant_condition_is_plain_mi():
    ab = np.array([[0.4, 0.1], [0.1, 0.4]])
    assert conditional_mi(ab[:, :, None]) == pytest.approx(mutual_information(ab), abs=1e-12)


def test_cmi_of_three_copies_is_zero():
    joint = np.zeros((2, 2, 2))
    joint[0, 0, 0] = joint[1, 1, 1] = 0.5
    assert conditional_mi(joint) == pytest.approx(0.0, abs=1e-12)


def _pmf(draw, shape):
    size = int(np.prod(shape))
    raw = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=size, max_size=size)))
    if raw.sum() == 0:
        raw[0] = 1.0
    return (raw / raw.sum()).reshape(shape)


@st.composite
def joints3(draw):
    shape = tuple(draw(st.integers(2, 3)) for _ in range(3))
    return _pmf(draw, shape)


@settings(max_examples=100, deadline=None)
@given(joints3())
def test_chain_rule(p):
    # I(A; B,C) = I(A;B) + I(A;C|B)
    lhs = mutual_information(p.reshape(p.shape[0], -1))
    ab = p.sum(axis=2)
    acb = p.transpose(0, 2, 1)
    assert lhs == pytest.approx(mutual_information(ab) + conditional_mi(acb), abs=1e-9)


@st.composite
def markov_triples(draw):
    na, nb, nc = (draw(st.integers(2, 4)) for _ in range(3))
    pa = _pmf(draw, (na,))
    k1 = np.stack([_pmf(draw, (nb,)) for _ in range(na)])
    k2 = np.stack([_pmf(draw, (nc,)) for _ in range(nb)])
    return pa, k1, k2


@settings(max_examples=100, deadline=None)
@given(markov_triples())
def test_data_processing(triple):
    pa, k1, k2 = triple
    ab = pa[:, None] * k1
    ac = ab @ k2
    assert mutual_information(ac) <= mutual_information(ab) + 1e-9


def test_entropy_helpers():
    assert entropy([0.25] * 4) == pytest.approx(2.0)
    assert h2(0.0) == 0.0
    assert h2(0.5) == pytest.approx(1.0)


def test_channel_mi_vectorized_matches_joint_form():
    w = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    stack = np.array([[0.5, 0.5], [0.1, 0.9], [1.0, 0.0]])
    got = channel_mi(stack, w)
    for px, v in zip(stack, got):
        assert v == pytest.approx(mutual_information(px[:, None] * w), abs=1e-12)


def test_simplex_grid_counts():
    g = simplex_grid(3, 5)
    assert g.shape == (15, 3)
    np.testing.assert_allclose(g.sum(axis=1), 1.0)


def test_rate_profile_symmetric_cascade():
    prof = rate_profile(bsc_cascade(0.1, 0.1))
    assert prof.main_capacity == pytest.approx(1 - h2(0.1), abs=1e-3)
    assert prof.secrecy_capacity == pytest.approx(h2(0.18) - h2(0.1), abs=1e-3)
    assert prof.main_capacity == pytest.approx(0.5310, abs=1e-3)
    assert prof.secrecy_capacity == pytest.approx(0.2111, abs=1e-3)
    assert prof.lam == 2
    assert not prof.ratio_is_integer
    assert prof.keyed_rate == pytest.approx(2 * prof.secrecy_capacity)


@pytest.mark.parametrize("p,q", [(0.05, 0.1), (0.1, 0.3), (0.02, 0.1), (0.2, 0.05), (0.3, 0.3)])
def test_grid_search_matches_closed_form(p, q):
    prof = rate_profile(bsc_cascade(p, q))
    assert prof.secrecy_capacity == pytest.approx(h2(star(p, q)) - h2(p), abs=1e-3)
    assert prof.main_capacity == pytest.approx(1 - h2(p), abs=1e-3)


def test_asymmetric_channel_matches_scalar_optimizer():
    # Z-channel for Bob, BSC degradation for Eve; optimum is not uniform
    fwd = np.array([[1.0, 0.0], [0.3, 0.7]])
    model = from_cascade(CascadeSpec(fwd, bsc(0.2)))
    prof = rate_profile(model)

    def neg_sec(a):
        px = np.array([1 - a, a])
        return -(channel_mi(px, model.bob) - channel_mi(px, model.eve))

    ref = minimize_scalar(neg_sec, bounds=(0, 1), method="bounded", options={"xatol": 1e-10})
    assert prof.secrecy_capacity == pytest.approx(-ref.fun, abs=1e-6)


def test_noiseless_bob_pure_noise_eve():
    prof = rate_profile(from_cascade(CascadeSpec(np.eye(2), bsc(0.5))))
    assert prof.main_capacity == pytest.approx(1.0, abs=1e-9)
    assert prof.secrecy_capacity == pytest.approx(1.0, abs=1e-9)
    assert prof.lam == 1
    assert prof.ratio_is_integer


def test_eve_as_good_as_bob_has_no_secrecy():
    with pytest.raises(NoSecrecyError, match="no secrecy"):
        rate_profile(from_cascade(CascadeSpec(bsc(0.1), np.eye(2))))


def test_lambda_rule():
    assert lambda_from_rates(1.0, 0.5) == (2, True)
    assert lambda_from_rates(1.0, 0.4) == (2, False)
    assert lambda_from_rates(1.0, 1.0) == (1, True)
    with pytest.raises(NoSecrecyError):
        lambda_from_rates(1.0, 0.0)


def test_gaussian_integer_example():
    prof = gaussian_rates(GaussianWiretapParams(3, 1, 3))
    assert prof.main_capacity == pytest.approx(1.0, abs=1e-12)
    assert prof.secrecy_capacity == pytest.approx(0.5, abs=1e-12)
    assert prof.lam == 2
    assert prof.ratio_is_integer


def test_gaussian_second_example():
    prof = gaussian_rates(GaussianWiretapParams(1, 0.25, 1))
    assert prof.secrecy_capacity == pytest.approx(0.5 * math.log2(5) - 0.5, abs=1e-12)
    assert prof.secrecy_capacity == pytest.approx(0.6610, abs=1e-4)


def test_gaussian_equal_noise_has_no_secrecy():
    with pytest.raises(NoSecrecyError):
        gaussian_rates(GaussianWiretapParams(1, 1, 1))


@pytest.mark.parametrize("args", [(-1, 1, 2), (1, 0, 2), (1, 1, float("nan"))])
def test_gaussian_params_must_be_positive(args):
    with pytest.raises(ValidationError):
        GaussianWiretapParams(*args)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 5), st.floats(0.01, 5), st.floats(0.01, 5))
def test_gaussian_monotonicity(power, sb, gap, bump):
    se = sb + gap
    base = gaussian_rates(GaussianWiretapParams(power, sb, se))
    more_eve_noise = gaussian_rates(GaussianWiretapParams(power, sb, se + bump))
    assert more_eve_noise.secrecy_capacity > base.secrecy_capacity
    sb2 = sb + min(bump, gap / 2)
    more_bob_noise = gaussian_rates(GaussianWiretapParams(power, sb2, se))
    assert more_bob_noise.main_capacity < base.main_capacity


def test_input_distribution_validation():
    assert len(InputDistribution.uniform(3)) == 3
    with pytest.raises(ValidationError):
        InputDistribution((0.5, 0.6))
