import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from entloc.errors import SupportTooLarge
from entloc.localization import ipr, moment_array, moments
from entloc.rng import keyed_rng
from entloc.states import (
    PureState,
    SupportSpec,
    cue_state,
    exp_envelope_cue_state,
    localized_cue_state,
    phase_state,
    shuffle_components,
)

# <p3> of a Haar vector at N = 32, from numerically integrating
# N * int x^3 (N-1)(1-x)^(N-2) dx (|c|^2 ~ Beta(1, N-1)) with scipy.quad
P3_CUE_N32 = 0.005347593582887703


def mean_and_stderr(x):
    x = np.asarray(x)
    return x.mean(), x.std(ddof=1) / np.sqrt(len(x))


def draw_many(fn, count, seed=0):
    return np.stack([fn(keyed_rng(seed, 1, i)).amplitudes for i in range(count)])


@given(seed=st.integers(0, 2**32), dim=st.integers(1, 64))
@settings(max_examples=30, deadline=None)
def test_cue_normalized(seed, dim):
    s = cue_state(dim, keyed_rng(seed))
    assert s.norm_error() <= 1e-12


@given(seed=st.integers(0, 2**32), data=st.data())
@settings(max_examples=40, deadline=None)
def test_localized_samplers_support(seed, data):
    n = data.draw(st.integers(1, 7))
    dim = 2**n
    m = data.draw(st.integers(1, dim))
    kind = data.draw(st.sampled_from(["random_subset", "adjacent_window"]))
    wrap = data.draw(st.booleans())
    sup = SupportSpec(kind, wrap=wrap)
    for fn in (localized_cue_state, phase_state):
        s = fn(dim, m, keyed_rng(seed), sup)
        assert s.norm_error() <= 1e-12
        assert np.count_nonzero(s.amplitudes) == m


def test_cue_single_component():
    s = cue_state(1, keyed_rng(0))
    assert abs(abs(s.amplitudes[0]) - 1) < 1e-15
    assert moments(s)[2] == pytest.approx(1.0)


def test_cue_determinism():
    a = cue_state(16, keyed_rng(7)).amplitudes
    b = cue_state(16, keyed_rng(7)).amplitudes
    assert a.tobytes() == b.tobytes()


def test_keyed_streams_differ():
    a = keyed_rng(7, 1, 0).standard_normal(4)
    b = keyed_rng(7, 1, 1).standard_normal(4)
    c = keyed_rng(7, 2, 0).standard_normal(4)
    assert not np.allclose(a, b) and not np.allclose(a, c)


def test_cue_mean_p2():
    psi = draw_many(lambda r: cue_state(64, r), 10_000)
    mean, se = mean_and_stderr(moment_array(psi)[:, 0])
    assert abs(mean - 2 / 65) <= 3 * se


def test_cue_mean_p3_matches_integration_oracle():
    assert P3_CUE_N32 == pytest.approx(6 / (33 * 34), rel=1e-12)
    psi = draw_many(lambda r: cue_state(32, r), 100_000, seed=5)
    mean, se = mean_and_stderr(moment_array(psi)[:, 1])
    assert abs(mean - P3_CUE_N32) <= 3 * se


def test_localized_cue_mean_p2():
    psi = draw_many(lambda r: localized_cue_state(256, 16, r), 10_000, seed=2)
    mean, se = mean_and_stderr(moment_array(psi)[:, 0])
    assert abs(mean - 2 / 17) <= 3 * se


def test_localized_single_component_is_product():
    from entloc.entanglement import tangles

    s = localized_cue_state(32, 1, keyed_rng(3))
    assert np.count_nonzero(s.amplitudes) == 1
    np.testing.assert_array_equal(tangles(s), 0.0)


def test_full_support_matches_cue_distribution():
    a = moment_array(draw_many(lambda r: localized_cue_state(16, 16, r), 4000, seed=1))[:, 0]
    b = moment_array(draw_many(lambda r: cue_state(16, r), 4000, seed=2))[:, 0]
    assert ks_2samp(a, b).pvalue > 0.01


def test_support_too_large():
    with pytest.raises(SupportTooLarge):
        localized_cue_state(8, 9, keyed_rng(0))
    with pytest.raises(SupportTooLarge):
        phase_state(8, 9, keyed_rng(0))


@given(seed=st.integers(0, 2**32), data=st.data())
@settings(max_examples=30, deadline=None)
def test_phase_state_flat(seed, data):
    dim = 2 ** data.draw(st.integers(1, 7))
    m = data.draw(st.integers(1, dim))
    s = phase_state(dim, m, keyed_rng(seed))
    mom = moments(s)
    for q in (2, 3, 4):
        assert mom[q] == pytest.approx(m ** (1 - q), rel=1e-12)
    assert mom.xi == pytest.approx(m, rel=1e-12)


def test_phase_state_full():
    for i in range(5):
        s = phase_state(8, 8, keyed_rng(i))
        assert moments(s)[2] == pytest.approx(1 / 8, rel=1e-14)


def test_phase_state_random_subset():
    s = phase_state(16, 4, keyed_rng(4), SupportSpec("random_subset"))
    nz = np.flatnonzero(s.amplitudes)
    assert len(nz) == 4
    np.testing.assert_allclose(np.abs(s.amplitudes[nz]) ** 2, 0.25, rtol=1e-14)


def test_adjacent_window_positions():
    r = keyed_rng(0)
    pos = SupportSpec("adjacent_window", start=14).draw(16, 4, r)
    np.testing.assert_array_equal(pos, [14, 15, 0, 1])
    pos = SupportSpec("adjacent_window", start=3, wrap=False).draw(16, 4, r)
    np.testing.assert_array_equal(pos, [3, 4, 5, 6])
    with pytest.raises(ValueError):
        SupportSpec("adjacent_window", start=14, wrap=False).draw(16, 4, r)
    for i in range(200):
        pos = SupportSpec("adjacent_window", wrap=False).draw(16, 5, keyed_rng(i))
        assert pos[0] >= 0 and pos[-1] <= 15 and np.all(np.diff(pos) == 1)


def test_pinned_subsets_same_moment_distribution():
    a_sup = SupportSpec("random_subset", positions=(0, 1, 2, 3, 4, 5, 6, 7))
    b_sup = SupportSpec("random_subset", positions=(3, 17, 22, 40, 41, 50, 60, 63))
    a = moment_array(draw_many(lambda r: localized_cue_state(64, 8, r, a_sup), 10_000, seed=1))
    b = moment_array(draw_many(lambda r: localized_cue_state(64, 8, r, b_sup), 10_000, seed=2))
    for q in range(3):
        assert ks_2samp(a[:, q], b[:, q]).pvalue > 0.01


def test_exp_envelope_large_length_is_cue_like():
    a = moment_array(draw_many(lambda r: exp_envelope_cue_state(64, np.inf, r), 4000, seed=1))[:, 0]
    b = moment_array(draw_many(lambda r: cue_state(64, r), 4000, seed=2))[:, 0]
    assert ks_2samp(a, b).pvalue > 0.01


def test_exp_envelope_mean_ipr():
    psi = draw_many(lambda r: exp_envelope_cue_state(1024, 16.0, r), 10_000, seed=9)
    mean_xi = ipr(psi).mean()
    assert abs(mean_xi - 16.0) <= 0.15 * 16.0


def test_exp_envelope_extreme_localization():
    xi = [ipr(exp_envelope_cue_state(256, 0.01, keyed_rng(i))) for i in range(50)]
    np.testing.assert_allclose(xi, 1.0, atol=1e-12)


def test_exp_envelope_center_and_normalization():
    s = exp_envelope_cue_state(64, 2.0, keyed_rng(1), center=0)
    assert s.norm_error() <= 1e-12
    # cyclic: labels 63 and 1 are equally far from 0
    prob = s.probabilities
    assert prob[32] < 1e-10


def test_shuffle_basis_state():
    s = shuffle_components(PureState.basis(8, 3), keyed_rng(1))
    assert np.count_nonzero(s.amplitudes) == 1


@given(seed=st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_shuffle_preserves_moments(seed):
    s = cue_state(32, keyed_rng(seed))
    t = shuffle_components(s, keyed_rng(seed + 1))
    np.testing.assert_array_equal(np.sort(s.probabilities), np.sort(t.probabilities))
    assert moments(t)[2] == pytest.approx(moments(s)[2], rel=1e-14, abs=0)


def test_shuffle_reproducible():
    s = PureState.from_amplitudes(np.arange(16, 0, -1))
    a = shuffle_components(s, keyed_rng(5)).amplitudes
    b = shuffle_components(s, keyed_rng(5)).amplitudes
    np.testing.assert_array_equal(a, b)
