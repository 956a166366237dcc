"""Random-vector ensembles on an N-dimensional (usually N = 2**n qubit) space.

All samplers take an explicit ``numpy.random.Generator`` and return a
:class:`PureState`. Basis label ``i`` is the binary string of the qubits with
qubit 0 as the most significant bit.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NotNormalized, SupportTooLarge

NORM_ATOL = 1e-12


def qubit_count(dim):
    """Return n with dim == 2**n, or None if dim is not a power of two."""
    dim = int(dim)
    if dim >= 1 and dim & (dim - 1) == 0:
        return dim.bit_length() - 1
    return None


@dataclass
class PureState:
    amplitudes: np.ndarray
    n_qubits: int | None = field(default=None)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.ndim != 1 or self.amplitudes.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-D array")
        if self.n_qubits is None:
            self.n_qubits = qubit_count(self.dim)
        elif 2**self.n_qubits != self.dim:
            raise ValueError(f"dim {self.dim} != 2**{self.n_qubits}")

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    @property
    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def norm_error(self):
        return abs(float(np.sum(self.probabilities)) - 1.0)

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    @classmethod
    def basis(cls, dim, index, phase=1.0):
        psi = np.zeros(dim, dtype=np.complex128)
        psi[index] = phase
        return cls(psi)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize=True):
        psi = np.asarray(amplitudes, dtype=np.complex128)
        if normalize:
            norm = np.linalg.norm(psi)
            if norm == 0:
                raise NotNormalized("zero vector cannot be normalized")
            psi = psi / norm
        return cls(psi)


def amplitudes_of(state):
    """Amplitude array of a PureState, or the array itself."""
    if isinstance(state, PureState):
        return state.amplitudes
    return np.asarray(state)


@dataclass(frozen=True)
class SupportSpec:
    """Where the nonzero components of a localized vector sit.

    ``kind`` is ``"full"``, ``"random_subset"`` or ``"adjacent_window"``.
    Adjacent windows are cyclic by default (``start`` uniform in 0..N-1, indices
    taken mod N); ``wrap=False`` gives the clipped variant with ``start``
    uniform in 0..N-M. ``positions`` pins a random subset; ``start`` pins a
    window.
    """

    kind: str = "random_subset"
    start: int | None = None
    wrap: bool = True
    positions: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("full", "random_subset", "adjacent_window"):
            raise ValueError(f"unknown support kind {self.kind!r}")

    def draw(self, dim, size, rng):
        """Return the sorted-by-construction index array of the support."""
        if size > dim:
            raise SupportTooLarge(f"M={size} > N={dim}")
        if size < 1:
            raise ValueError("support size must be >= 1")
        if self.kind == "full":
            if size != dim:
                raise ValueError("full support requires M == N")
            return np.arange(dim)
        if self.kind == "random_subset":
            if self.positions is not None:
                pos = np.asarray(self.positions, dtype=np.int64)
                if len(pos) != size or len(set(pos.tolist())) != size:
                    raise ValueError("pinned positions must be M distinct indices")
                if pos.min() < 0 or pos.max() >= dim:
                    raise ValueError("pinned positions out of range")
                return pos
            return rng.choice(dim, size=size, replace=False)
        if self.wrap:
            start = self.start if self.start is not None else int(rng.integers(dim))
            return (start + np.arange(size)) % dim
        start = self.start if self.start is not None else int(rng.integers(dim - size + 1))
        if not 0 <= start <= dim - size:
            raise ValueError(f"window start {start} does not fit M={size} in N={dim}")
        return start + np.arange(size)


def _complex_gaussian(rng, size):
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def _haar(rng, size):
    g = _complex_gaussian(rng, size)
    return g / np.linalg.norm(g)


def cue_state(dim, rng):
    """Haar-random (CUE column) state of dimension ``dim``."""
    if dim < 1:
        raise ValueError("N must be >= 1")
    return PureState(_haar(rng, dim))


def localized_cue_state(dim, size, rng, support=None):
    """CUE vector of dimension ``size`` placed on ``size`` of ``dim`` basis states."""
    support = support or SupportSpec("random_subset")
    if size > dim:
        raise SupportTooLarge(f"M={size} > N={dim}")
    pos = support.draw(dim, size, rng)
    psi = np.zeros(dim, dtype=np.complex128)
    psi[pos] = _haar(rng, size)
    return PureState(psi)


def phase_state(dim, size, rng, support=None):
    """Equal moduli ``1/sqrt(M)`` and i.i.d. uniform phases on the support."""
    support = support or SupportSpec("random_subset")
    if size > dim:
        raise SupportTooLarge(f"M={size} > N={dim}")
    pos = support.draw(dim, size, rng)
    psi = np.zeros(dim, dtype=np.complex128)
    psi[pos] = np.exp(2j * np.pi * rng.random(size)) / np.sqrt(size)
    return PureState(psi)


def cyclic_distance(dim, center):
    i = np.arange(dim)
    d = np.abs(i - center)
    return np.minimum(d, dim - d)


def exp_envelope_cue_state(dim, length, rng, center=None):
    """Complex Gaussian amplitudes times ``exp(-d(i, i0) / length)``, normalized.

    ``d`` is the cyclic distance to a uniformly drawn center ``i0``.
    """
    if not length > 0:
        raise ValueError("envelope length must be > 0")
    if center is None:
        center = int(rng.integers(dim))
    g = _complex_gaussian(rng, dim)
    if np.isinf(length):
        return PureState(g / np.linalg.norm(g))
    psi = g * np.exp(-cyclic_distance(dim, center) / length)
    return PureState(psi / np.linalg.norm(psi))


def shuffle_components(state, rng):
    """Apply a uniformly random permutation to the components."""
    psi = amplitudes_of(state)
    perm = rng.permutation(psi.shape[-1])
    out = psi[..., perm]
    if isinstance(state, PureState):
        return PureState(out, state.n_qubits)
    return out


def check_normalized(psi, atol=1e-9):
    psi = amplitudes_of(psi)
    err = np.max(np.abs(np.sum(np.abs(psi) ** 2, axis=-1) - 1.0))
    if err > atol:
        raise NotNormalized(f"sum |psi|^2 deviates from 1 by {err:.3e}")
