from fractions import Fraction

import numpy as np
import pytest

from entloc.errors import DegenerateGamma, NotPowerOfTwo, TooLarge
from entloc.linalg import unitarity_residual
from entloc.localization import moment_array
from entloc.models import (
    AndersonParams,
    IsrmParams,
    SpinModelParams,
    Spectrum,
    anderson_eigvectors,
    isrm_eigvectors,
    isrm_matrix,
    parse_gamma,
    spin_couplings,
    spin_eigvectors,
    spin_hamiltonian,
)
from entloc.rng import keyed_rng
from entloc.states import PureState, shuffle_components

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def kron_op(n, ops):
    out = np.ones((1, 1))
    for q in range(n):
        out = np.kron(out, ops.get(q, np.eye(2)))
    return out


def test_spin_single_qubit():
    h = spin_hamiltonian([0.7], np.zeros((1, 1)))
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-0.7, 0.7])


def test_spin_xx_pair():
    jmat = np.array([[0, 1.3], [0, 0]])
    h = spin_hamiltonian([0, 0], jmat)
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-1.3, -1.3, 1.3, 1.3], atol=1e-14)


def test_spin_matches_kron_products(rng):
    n = 4
    p = SpinModelParams(n=n, delta=0.8, j_coupling=1.2)
    gammas, jmat = spin_couplings(p, rng)
    want = sum(gammas[i] * kron_op(n, {i: Z}) for i in range(n))
    for i in range(n):
        for j in range(i + 1, n):
            want = want + jmat[i, j] * kron_op(n, {i: X, j: X})
    np.testing.assert_allclose(spin_hamiltonian(gammas, jmat), want, atol=1e-14)


def test_spin_couplings_ranges(rng):
    p = SpinModelParams.from_ratios(6, delta_ratio=0.5, j_over_delta=2.0)
    assert p.j_coupling == pytest.approx(1.0)
    g, j = spin_couplings(p, rng)
    assert np.all((0.75 <= g) & (g <= 1.25))
    assert np.all(np.abs(j) <= 1.0)
    assert np.all(np.tril(j) == 0)


@pytest.mark.parametrize("method", ["lapack", "native"])
def test_spin_eigvectors_orthonormal(method):
    spec = spin_eigvectors(SpinModelParams(n=5, seed=3), method=method)
    v = spec.vectors
    np.testing.assert_allclose(v @ v.conj().T, np.eye(32), atol=1e-8)
    assert np.all(np.diff(spec.eigenvalues) >= -1e-12)


def test_spin_methods_agree():
    a = spin_eigvectors(SpinModelParams(n=6, seed=1), method="lapack")
    b = spin_eigvectors(SpinModelParams(n=6, seed=1), method="native")
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)


def test_spin_too_large():
    with pytest.raises(TooLarge):
        spin_eigvectors(SpinModelParams(n=13))
    with pytest.raises(TooLarge):
        spin_eigvectors(SpinModelParams(n=0))


def test_isrm_two_by_two():
    u = isrm_matrix(2, Fraction(1, 4), np.zeros(2))
    np.testing.assert_allclose(np.abs(u) ** 2, 0.5, atol=1e-15)


@pytest.mark.parametrize("dim", [4, 7, 64, 256])
@pytest.mark.parametrize("gamma", [Fraction(1, 3), Fraction(2, 7), 0.3137])
def test_isrm_unitary(dim, gamma, rng):
    phases = rng.uniform(0, 2 * np.pi, dim)
    if dim * gamma == int(dim * gamma):
        with pytest.raises(DegenerateGamma):
            isrm_matrix(dim, gamma, phases)
        return
    u = isrm_matrix(dim, gamma, phases)
    assert unitarity_residual(u) <= 1e-10
    np.testing.assert_allclose(np.linalg.norm(u, axis=0), 1, atol=1e-10)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1, atol=1e-10)


def test_isrm_degenerate_gamma():
    with pytest.raises(DegenerateGamma):
        isrm_matrix(6, Fraction(1, 3), np.zeros(6))
    with pytest.raises(DegenerateGamma):
        isrm_matrix(8, 0.25, np.zeros(8))


def test_isrm_eigvectors():
    spec = isrm_eigvectors(IsrmParams(64, Fraction(1, 3), seed=2))
    u = isrm_matrix(64, Fraction(1, 3), keyed_rng(2, 2, 0).uniform(0, 2 * np.pi, 64))
    v = spec.vectors.T
    res = np.linalg.norm(u @ v - v * spec.eigenvalues, axis=0).max()
    assert res <= 1e-8 * np.sqrt(64)
    np.testing.assert_allclose(np.abs(spec.eigenvalues), 1, atol=1e-8)
    with pytest.raises(TooLarge):
        isrm_eigvectors(IsrmParams(2, Fraction(1, 3)))


def test_parse_gamma():
    assert parse_gamma("1/3") == Fraction(1, 3)
    assert parse_gamma("0.3") == 0.3
    assert parse_gamma(Fraction(2, 5)) == Fraction(2, 5)


def test_anderson_clean_chain():
    spec = anderson_eigvectors(AndersonParams(4, w=0.0))
    k = np.arange(1, 5)
    np.testing.assert_allclose(np.sort(spec.eigenvalues), np.sort(2 * np.cos(np.pi * k / 5)), atol=1e-13)


def test_anderson_localized_at_strong_disorder():
    spec = anderson_eigvectors(AndersonParams(512, w=2.0, seed=1), window="central50")
    assert len(spec) == 256
    xi = 1 / moment_array(spec.vectors)[:, 0]
    assert xi.mean() < 512 / 20


def test_anderson_properties():
    spec = anderson_eigvectors(AndersonParams(64, w=1.0, seed=5))
    assert len(spec) == 64
    v = spec.vectors
    assert np.abs(np.imag(v)).max() == 0
    np.testing.assert_allclose(v @ v.T, np.eye(64), atol=1e-10)


def test_anderson_errors():
    with pytest.raises(NotPowerOfTwo):
        anderson_eigvectors(AndersonParams(12), as_qubits=True)
    anderson_eigvectors(AndersonParams(12))
    with pytest.raises(TooLarge):
        anderson_eigvectors(AndersonParams(1))


def test_spectrum_select():
    s = Spectrum(np.arange(8.0), np.eye(8))
    mid = s.select("central50")
    np.testing.assert_array_equal(mid.eigenvalues, [2, 3, 4, 5])
    assert s.select(None) is s
    with pytest.raises(ValueError):
        s.select("edges")
    assert isinstance(s.states()[0], PureState)


def test_shuffle_keeps_model_moments():
    for spec in (
        spin_eigvectors(SpinModelParams(n=5, seed=1)),
        isrm_eigvectors(IsrmParams(32, Fraction(1, 3), seed=1)),
        anderson_eigvectors(AndersonParams(32, seed=1)),
    ):
        before = moment_array(spec.vectors)
        after = np.stack(
            [shuffle_components(s, keyed_rng(0, 3, i)).amplitudes for i, s in enumerate(spec.states())]
        )
        np.testing.assert_allclose(moment_array(after), before, rtol=1e-12)
