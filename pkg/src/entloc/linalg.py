"""Dense eigensolvers for Hermitian, real tridiagonal and unitary matrices.

Two interchangeable routes are provided:

``method="lapack"``
    numpy/scipy LAPACK drivers (``zheevd``/``dsyevd``, ``dstemr``). Default,
    used by the Monte Carlo code for throughput.
``method="native"``
    Householder reduction to a real symmetric tridiagonal matrix followed by
    implicit-shift QL with eigenvector accumulation. The QL sweep is compiled
    with numba.

Both return an :class:`EigenDecomposition` with ascending eigenvalues and the
eigenvectors stored as *columns*, and both are checked against the same
residual contracts in the test suite.
"""

from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSpectrum,
    NoConvergence,
    NonHermitianInput,
    NonUnitaryInput,
)

HERMITIAN_RTOL = 1e-12
UNITARY_ATOL = 1e-10
CAYLEY_MIN_SINGULAR = 1e-6
CAYLEY_RETRIES = 8
UNIT_CIRCLE_ATOL = 1e-8
RESIDUAL_RTOL = 1e-8
METHODS = ("lapack", "native")


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None  # columns

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors

    def residuals(self, m):
        """Column-wise ``||M v_k - lambda_k v_k||_2``."""
        v = self.eigenvectors
        return np.linalg.norm(m @ v - v * self.eigenvalues, axis=0)


def _check_method(method):
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def _square(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def check_hermitian(m, rtol=HERMITIAN_RTOL):
    scale = max(np.max(np.abs(m)), 1e-300) if m.size else 1.0
    err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if err > rtol * scale:
        raise NonHermitianInput(f"max |M - M^H| = {err:.3e} exceeds {rtol:g} * max|M|")


# ---------------------------------------------------------------------------
# native route


@numba.njit(cache=True)
def _tql2(d, e, z, max_iter):
    # Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
    # d: diagonal (n), e: subdiagonal padded to length n with e[n-1] = 0.
    # z: rows are accumulated vectors (z[i] is the i-th eigenvector on exit),
    # or an empty (0, n) array when vectors are not wanted.
    n = d.shape[0]
    want = z.shape[0] > 0
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > max_iter:
                return False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want:
                    for k in range(n):
                        f = z[i + 1, k]
                        z[i + 1, k] = s * z[i, k] + c * f
                        z[i, k] = c * z[i, k] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return True


def _native_tridiagonal(diag, offdiag, want_vectors):
    n = diag.shape[0]
    d = np.array(diag, dtype=np.float64)
    e = np.zeros(n, dtype=np.float64)
    e[: n - 1] = offdiag
    z = np.eye(n) if want_vectors else np.empty((0, n))
    if not _tql2(d, e, z, 30 * max(n, 1)):
        raise NoConvergence(f"implicit QL exceeded {30 * n} iterations (n={n})")
    order = np.argsort(d, kind="stable")
    vecs = z[order].T.copy() if want_vectors else None
    return d[order], vecs


def householder_tridiagonalize(m):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns ``(diag, offdiag, q)`` with ``m = q @ T @ q^H`` where ``T`` is the
    real tridiagonal matrix and ``q`` is unitary (already including the
    diagonal phase change that makes the off-diagonal real and non-negative).
    """
    dtype = np.complex128 if np.iscomplexobj(m) else np.float64
    a = np.array(m, dtype=dtype)
    n = a.shape[0]
    q = np.eye(n, dtype=dtype)
    for k in range(n - 2):
        x = a[k + 1 :, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        alpha = -phase * xnorm
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = a[k + 1 :, k + 1 :]
        p = sub @ v
        kk = np.vdot(v, p).real
        w = 2.0 * (p - kk * v)
        sub -= np.outer(w, v.conj()) + np.outer(v, w.conj())
        a[k + 1 :, k] = 0.0
        a[k, k + 1 :] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = np.conj(alpha)
        qs = q[:, k + 1 :]
        qs -= 2.0 * np.outer(qs @ v, v.conj())
    diag = a.diagonal().real.copy()
    sub = a.diagonal(-1).copy()
    offdiag = np.abs(sub)
    # diagonal phases so that D^H T D has real non-negative off-diagonal
    phases = np.ones(n, dtype=dtype)
    for k in range(n - 1):
        ph = sub[k] / offdiag[k] if offdiag[k] > 0 else 1.0
        phases[k + 1] = phases[k] * ph
    q *= phases
    return diag, offdiag, q


# ---------------------------------------------------------------------------
# public kernel


def hermitian_eig(m, want_vectors=True, method="lapack"):
    """Eigendecomposition of a Hermitian (or real symmetric) matrix.

    Eigenvalues are real and ascending; eigenvectors are orthonormal columns.
    Real input stays on a real code path.
    """
    _check_method(method)
    m = _square(m)
    check_hermitian(m)
    if m.shape[0] == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0)) if want_vectors else None)
    if method == "lapack":
        try:
            if want_vectors:
                w, v = np.linalg.eigh(m)
                return EigenDecomposition(w, v)
            return EigenDecomposition(np.linalg.eigvalsh(m))
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(str(exc)) from exc
    diag, offdiag, q = householder_tridiagonalize(m)
    w, z = _native_tridiagonal(diag, offdiag, want_vectors)
    if not want_vectors:
        return EigenDecomposition(w)
    return EigenDecomposition(w, q @ z)


def tridiagonal_sym_eig(diag, offdiag, want_vectors=True, method="lapack"):
    """Eigendecomposition of a real symmetric tridiagonal matrix."""
    _check_method(method)
    diag = np.asarray(diag, dtype=np.float64)
    offdiag = np.asarray(offdiag, dtype=np.float64)
    if diag.ndim != 1 or offdiag.ndim != 1 or len(offdiag) != max(len(diag) - 1, 0):
        raise ValueError("need len(offdiag) == len(diag) - 1")
    if len(diag) == 1:
        return EigenDecomposition(diag.copy(), np.ones((1, 1)) if want_vectors else None)
    if method == "lapack":
        try:
            if want_vectors:
                w, v = scipy.linalg.eigh_tridiagonal(diag, offdiag)
                return EigenDecomposition(w, v)
            return EigenDecomposition(scipy.linalg.eigh_tridiagonal(diag, offdiag, eigvals_only=True))
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(str(exc)) from exc
    w, v = _native_tridiagonal(diag, offdiag, want_vectors)
    return EigenDecomposition(w, v)


def check_unitary(u, atol=UNITARY_ATOL):
    err = unitarity_residual(u)
    if err > atol:
        raise NonUnitaryInput(f"max |U U^H - I| = {err:.3e} exceeds {atol:g}")


def unitarity_residual(u):
    u = np.asarray(u)
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


def unitary_eig(u, rng=None, method="lapack"):
    """Eigendecomposition of a unitary matrix through a Cayley transform.

    A random global phase ``alpha`` moves the spectrum away from -1, the
    Hermitian matrix ``H = i (I - U') (I + U')^{-1}`` is diagonalized, and the
    eigenvalues are recovered as Rayleigh quotients ``v^H U v``. Eigenvalues
    are returned sorted by their argument in ``(-pi, pi]``.
    """
    _check_method(method)
    u = _square(u).astype(np.complex128)
    check_unitary(u)
    n = u.shape[0]
    rng = np.random.default_rng(0) if rng is None else rng
    eye = np.eye(n)
    frob = np.sqrt(n)
    for _ in range(CAYLEY_RETRIES):
        alpha = rng.uniform(0.0, 2.0 * np.pi)
        up = np.exp(1j * alpha) * u
        plus = eye + up
        try:
            # H = i (I - U') (I + U')^{-1}; the two factors commute
            h = 1j * np.linalg.solve(plus.T, (eye - up).T).T
        except np.linalg.LinAlgError:
            continue
        h = 0.5 * (h + h.conj().T)
        if not np.all(np.isfinite(h)):
            continue
        dec = hermitian_eig(h, want_vectors=True, method=method)
        # singular values of I + U' are |1 + lambda'| = 2 / sqrt(1 + mu^2)
        mu_max = np.max(np.abs(dec.eigenvalues))
        if 2.0 / np.sqrt(1.0 + mu_max**2) < CAYLEY_MIN_SINGULAR:
            continue
        v = dec.eigenvectors
        lam = np.einsum("ij,ij->j", v.conj(), u @ v)
        lam /= np.abs(lam)
        if np.max(np.linalg.norm(u @ v - v * lam, axis=0)) > RESIDUAL_RTOL * frob:
            continue
        order = np.argsort(np.angle(lam), kind="stable")
        return EigenDecomposition(lam[order], v[:, order])
    raise DegenerateSpectrum(
        f"Cayley transform failed to meet the residual contract after {CAYLEY_RETRIES} phases"
    )


def hermitian_eigvalsh_batch(m):
    """Eigenvalues of a stack ``(..., d, d)`` of small Hermitian matrices."""
    return np.linalg.eigvalsh(m)
