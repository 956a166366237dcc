"""Monte Carlo experiments: sample states, measure, average, compare.

An :class:`EnsembleSpec` fully determines a run. Sample ``i`` draws all of its
randomness from ``keyed_rng(seed, stream, i)`` and means are exact (``fsum``)
sums, so a record does not depend on how many worker threads produced it.
"""

import csv
import dataclasses
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, theory
from . import rng as rngmod
from .entanglement import (
    Bipartition,
    entropy_from_tangle,
    linear_entropy,
    partial_trace,
    tangle_expansion,
    tangles,
    von_neumann_entropy,
)
from .errors import EntlocError, NoTheoryAvailable, NotPowerOfTwo, SampleError, SpecError
from .localization import moment_array
from .models import (
    AndersonParams,
    IsrmParams,
    SpinModelParams,
    anderson_eigvectors,
    isrm_eigvectors,
    parse_gamma,
    spin_eigvectors,
)
from .states import (
    SupportSpec,
    cue_state,
    exp_envelope_cue_state,
    localized_cue_state,
    phase_state,
    qubit_count,
)

STATE_SOURCES = ("cue", "localized_cue", "phase", "exp_envelope", "adjacent_phase", "adjacent_cue")
MODEL_SOURCES = ("model:spin", "model:isrm", "model:anderson")
SOURCES = STATE_SOURCES + MODEL_SOURCES
SINGLE_CUT_OBS = ("tau", "tau_sq", "Q", "S1", "S2")
PARTITION_OBS = ("S", "S_L")
MOMENT_OBS = ("p2", "p3", "p4", "p2_sq")
OBSERVABLES = SINGLE_CUT_OBS + PARTITION_OBS + MOMENT_OBS
SWEEPABLE = (
    "N", "n", "M", "l", "samples", "seed", "delta_ratio", "j_over_delta", "gamma", "disorder",
    "realizations",
)
CSV_COLUMNS = (
    "source", "N", "M_or_l", "nu", "observable", "mean", "stderr", "samples", "theory",
    "z_score", "seed",
)
N_BATCHES = 32
CHUNK = 256
Z_THRESHOLD = 3.0


def default_workers():
    env = os.environ.get("ENTLOC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class EnsembleSpec:
    source: str
    N: int
    M: int | None = None
    l: float | None = None
    partitions: tuple = (1,)
    samples: int = 1000
    seed: int = 0
    shuffle: bool = False
    observables: tuple = ("tau",)
    # model parameters
    delta_ratio: float = 1.0
    j_over_delta: float = 1.5
    gamma: str = "1/3"
    disorder: float = 1.0
    window: str | None = None
    realizations: int | None = None
    # adjacent windows wrap around N unless False
    wrap: bool = True

    def __post_init__(self):
        object.__setattr__(self, "partitions", tuple(
            tuple(p) if isinstance(p, (list, tuple)) else int(p) for p in self.partitions
        ))
        object.__setattr__(self, "observables", tuple(self.observables))

    @property
    def is_model(self):
        return self.source in MODEL_SOURCES

    @property
    def n_qubits(self):
        return qubit_count(self.N)

    @property
    def m_or_l(self):
        if self.source in ("localized_cue", "phase", "adjacent_phase", "adjacent_cue"):
            return self.M
        if self.source == "exp_envelope":
            return self.l
        return None

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["partitions"] = [list(p) if isinstance(p, tuple) else p for p in self.partitions]
        d["observables"] = list(self.observables)
        return d

    def validate(self):
        if self.source not in SOURCES:
            raise SpecError(f"unknown source {self.source!r}; expected one of {SOURCES}")
        if self.samples < 1:
            raise SpecError("samples must be >= 1")
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad or not self.observables:
            raise SpecError(f"unknown observables {bad}; expected a subset of {OBSERVABLES}")
        if self.shuffle and not self.is_model:
            raise SpecError("shuffle is only meaningful for model sources")
        if self.N < 2:
            raise SpecError("N must be >= 2")
        if self.source in ("localized_cue", "phase", "adjacent_phase", "adjacent_cue"):
            if self.M is None or not 1 <= self.M <= self.N:
                raise SpecError(f"source {self.source} needs 1 <= M <= N")
        if self.source == "exp_envelope" and (self.l is None or not self.l > 0):
            raise SpecError("exp_envelope needs l > 0")
        needs_qubits = any(o not in MOMENT_OBS for o in self.observables)
        n = self.n_qubits
        if needs_qubits and n is None:
            raise NotPowerOfTwo(f"entanglement observables need N = 2**n, got N={self.N}")
        if needs_qubits and n < 2:
            raise SpecError("entanglement observables need at least 2 qubits")
        if needs_qubits:
            for p in self.partitions:
                if isinstance(p, int):
                    if not 1 <= p < n:
                        raise SpecError(f"partition nu={p} must satisfy 1 <= nu < n={n}")
                else:
                    Bipartition(n, p)
        if self.window not in (None, "central50"):
            raise SpecError(f"unknown window {self.window!r}")
        if self.source == "model:spin" and n is None:
            raise SpecError("spin model needs N = 2**n")
        if self.realizations is not None and self.realizations < 1:
            raise SpecError("realizations must be >= 1")


@dataclass(frozen=True)
class Column:
    observable: str
    nu: str  # "1" (all single-qubit cuts), "k" (leading k qubits) or "i+j" (explicit)
    subset: tuple | None = None


def _label(p):
    return str(p) if isinstance(p, int) else "+".join(str(i) for i in p)


def _columns(spec):
    cols = []
    for obs in spec.observables:
        if obs in MOMENT_OBS:
            cols.append(Column(obs, ""))
        elif obs in SINGLE_CUT_OBS:
            cols.append(Column(obs, "1"))
        else:
            for p in spec.partitions:
                cols.append(Column(obs, _label(p), None if isinstance(p, int) else p))
    return cols


def _single_qubits(spec):
    explicit = [p[0] for p in spec.partitions if isinstance(p, tuple) and len(p) == 1]
    if 1 in spec.partitions or not explicit:
        return None
    return explicit


def _cut_rho(psi, n, col):
    if col.subset is not None:
        part = Bipartition(n, col.subset)
    else:
        part = Bipartition.leading(n, int(col.nu))
    part = part.canonical()
    return partial_trace(psi, part)


def evaluate_batch(psi, spec, cols):
    """Per-state observable values, shape ``(B, len(cols) + 4)``.

    The last four columns always hold p2, p3, p4, p2^2 (used for theory).
    """
    out = np.empty((psi.shape[0], len(cols) + 4))
    mom = moment_array(psi, 4)
    need_ent = any(c.observable not in MOMENT_OBS for c in cols)
    n = spec.n_qubits
    taus = None
    if need_ent:
        taus = tangles(psi)
        sel = _single_qubits(spec)
        if sel is not None:
            taus = taus[:, sel]
    for k, c in enumerate(cols):
        o = c.observable
        if o == "p2":
            out[:, k] = mom[:, 0]
        elif o == "p3":
            out[:, k] = mom[:, 1]
        elif o == "p4":
            out[:, k] = mom[:, 2]
        elif o == "p2_sq":
            out[:, k] = mom[:, 0] ** 2
        elif o in ("tau", "Q"):
            out[:, k] = taus.mean(axis=1)
        elif o == "tau_sq":
            out[:, k] = (taus**2).mean(axis=1)
        elif o == "S1":
            out[:, k] = tangle_expansion(taus, 1).mean(axis=1)
        elif o == "S2":
            out[:, k] = tangle_expansion(taus, 2).mean(axis=1)
        elif c.nu == "1" and c.subset is None:
            if o == "S":
                out[:, k] = entropy_from_tangle(taus).mean(axis=1)
            else:
                out[:, k] = taus.mean(axis=1)  # S_L == tau for d = 2
        else:
            rho = _cut_rho(psi, n, c)
            if o == "S":
                out[:, k] = von_neumann_entropy(rho)
            else:
                out[:, k] = linear_entropy(rho)
    out[:, -4:-1] = mom
    out[:, -1] = mom[:, 0] ** 2
    return out


def _evaluate_located(psi, spec, cols, first_index):
    try:
        return evaluate_batch(psi, spec, cols)
    except EntlocError:
        for j in range(psi.shape[0]):
            try:
                evaluate_batch(psi[j : j + 1], spec, cols)
            except EntlocError as exc:
                raise SampleError(first_index + j, exc) from exc
        raise


def _draw_state(spec, i):
    rng = rngmod.keyed_rng(spec.seed, rngmod.STATES, i)
    src = spec.source
    if src == "cue":
        return cue_state(spec.N, rng).amplitudes
    if src == "localized_cue":
        return localized_cue_state(spec.N, spec.M, rng).amplitudes
    if src == "phase":
        return phase_state(spec.N, spec.M, rng).amplitudes
    if src == "adjacent_phase":
        return phase_state(spec.N, spec.M, rng, SupportSpec("adjacent_window", wrap=spec.wrap)).amplitudes
    if src == "adjacent_cue":
        sup = SupportSpec("adjacent_window", wrap=spec.wrap)
        return localized_cue_state(spec.N, spec.M, rng, sup).amplitudes
    if src == "exp_envelope":
        return exp_envelope_cue_state(spec.N, spec.l, rng).amplitudes
    raise SpecError(src)


def _state_chunk(spec, cols, start, stop):
    try:
        psi = np.stack([_draw_state(spec, i) for i in range(start, stop)])
    except EntlocError as exc:
        raise SampleError(start, exc) from exc
    return _evaluate_located(psi, spec, cols, start)


def model_spectrum(spec, realization):
    rng = rngmod.keyed_rng(spec.seed, rngmod.MODEL, realization)
    if spec.source == "model:spin":
        p = SpinModelParams.from_ratios(spec.n_qubits, spec.delta_ratio, spec.j_over_delta, spec.seed)
        s = spin_eigvectors(p, rng)
    elif spec.source == "model:isrm":
        s = isrm_eigvectors(IsrmParams(spec.N, parse_gamma(spec.gamma), spec.seed), rng)
    else:
        needs_qubits = any(o not in MOMENT_OBS for o in spec.observables)
        s = anderson_eigvectors(AndersonParams(spec.N, spec.disorder, spec.seed), rng, as_qubits=needs_qubits)
    return s.select(spec.window)


def vectors_per_realization(spec):
    return spec.N - 2 * (spec.N // 4) if spec.window == "central50" else spec.N


def n_realizations(spec):
    if spec.realizations is not None:
        return spec.realizations
    return math.ceil(spec.samples / vectors_per_realization(spec))


def _model_chunk(spec, cols, realization):
    per = vectors_per_realization(spec)
    first = realization * per
    try:
        vecs = model_spectrum(spec, realization).vectors.astype(np.complex128)
    except EntlocError as exc:
        raise SampleError(first, exc) from exc
    if spec.shuffle:
        for k in range(vecs.shape[0]):
            r = rngmod.keyed_rng(spec.seed, rngmod.SHUFFLE, first + k)
            vecs[k] = vecs[k, r.permutation(vecs.shape[1])]
    return _evaluate_located(vecs, spec, cols, first)


def _fsum_mean(x):
    return math.fsum(x) / len(x)


def batch_mean_stderr(values, n_batches=N_BATCHES):
    """Standard error from contiguous batch means (plain estimator for few samples)."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 2:
        return float("nan")
    if n < 2 * n_batches:
        mu = _fsum_mean(values)
        return math.sqrt(math.fsum((values - mu) ** 2) / (n - 1) / n)
    means = np.array([_fsum_mean(b) for b in np.array_split(values, n_batches)])
    mu = _fsum_mean(means)
    return math.sqrt(math.fsum((means - mu) ** 2) / (n_batches - 1) / n_batches)


@dataclass
class ObservableStat:
    observable: str
    nu: str
    mean: float
    stderr: float
    samples: int
    theory: float | None = None

    @property
    def z_score(self):
        if self.theory is None:
            return None
        diff = self.mean - self.theory
        # deterministic observables agree only up to rounding
        if abs(diff) <= 1e-12 * max(1.0, abs(self.theory)):
            return 0.0
        if self.stderr > 0:
            return diff / self.stderr
        return math.copysign(math.inf, diff)

    @property
    def rel_dev(self):
        if self.theory is None or self.theory == 0:
            return None
        return (self.mean - self.theory) / abs(self.theory)


@dataclass
class ExperimentRecord:
    spec: EnsembleSpec
    stats: list
    metadata: dict = field(default_factory=dict)
    values: np.ndarray | None = field(default=None, repr=False)

    def get(self, observable, nu=None):
        for s in self.stats:
            if s.observable == observable and (nu is None or s.nu == str(nu)):
                return s
        raise KeyError((observable, nu))

    @property
    def moment_means(self):
        return self.metadata["moment_means"]

    def rows(self, axis_value=None):
        out = []
        for s in self.stats:
            row = {}
            if axis_value is not None:
                row["axis_value"] = axis_value
            z = s.z_score
            row.update(
                source=self.spec.source,
                N=self.spec.N,
                M_or_l=self.spec.m_or_l if self.spec.m_or_l is not None else "",
                nu=s.nu,
                observable=s.observable,
                mean=s.mean,
                stderr=s.stderr,
                samples=s.samples,
                theory="" if s.theory is None else s.theory,
                z_score="" if z is None else z,
                seed=self.spec.seed,
            )
            out.append(row)
        return out


def theory_value(spec, col, moments):
    """Prediction for one column, or None if no formula applies.

    ``moments`` are the measured (p2, p3, p4, p2^2) means; they stand in for
    the ensemble moments of model sources.
    """
    src, N, M, obs = spec.source, spec.N, spec.M, col.observable
    n = spec.n_qubits
    random_position = src in ("cue", "localized_cue", "phase") or (
        spec.is_model and (spec.shuffle or src != "model:anderson")
    )
    if src == "cue":
        ens = theory.cue_moments(N)
    elif src in ("localized_cue", "adjacent_cue"):
        ens = theory.cue_moments(M)
    elif src in ("phase", "adjacent_phase"):
        ens = theory.flat_moments(M)
    elif spec.is_model:
        try:
            ens = theory.MomentInputs(*moments)
        except EntlocError:
            ens = None
    else:
        ens = None
    try:
        if obs in MOMENT_OBS:
            if ens is None or spec.is_model:
                return None
            return {"p2": ens.mean_p2, "p3": ens.mean_p3, "p4": ens.mean_p4, "p2_sq": ens.mean_p2_sq}[obs]
        if obs in ("tau", "Q"):
            if src == "cue":
                return theory.predict_tau_localized_cue(N, N)
            if src == "localized_cue":
                return theory.predict_tau_localized_cue(N, M)
            if src == "phase":
                return theory.predict_tau_phase(N, M)
            if src in ("adjacent_phase", "adjacent_cue"):
                mode = "exact" if theory.EXACT_ADJACENT_ENABLED else "power_of_two"
                return theory.predict_tau_adjacent(N, M, n, ens.mean_p2, mode)
            if src == "exp_envelope":
                return theory.predict_tau_adjacent(N, 2 * spec.l, n, 1.0 / spec.l)
            if random_position and ens is not None:
                return theory.predict_tau_mean(N, ens.mean_p2)
            return None
        if not random_position or ens is None:
            return None
        if obs == "tau_sq":
            return theory.predict_tau_second_moment(N, ens)
        if obs == "S1":
            return theory.predict_entropy_tangle_orders(N, ens, 1)
        if obs == "S2":
            return theory.predict_entropy_tangle_orders(N, ens, 2)
        nu = len(col.subset) if col.subset is not None else int(col.nu)
        nu = min(nu, n - nu)
        if obs == "S_L":
            return theory.predict_linear_entropy(N, nu, ens.mean_p2)
        if obs == "S" and src == "cue" and nu == 1:
            return theory.predict_cue_entropy(N)
    except EntlocError:
        return None
    return None


def run_experiment(spec, workers=None, keep_values=False):
    """Run one ensemble and return its :class:`ExperimentRecord`."""
    spec.validate()
    cols = _columns(spec)
    workers = workers or default_workers()
    t0 = time.perf_counter()
    if spec.is_model:
        jobs = range(n_realizations(spec))
        fn = lambda r: _model_chunk(spec, cols, r)  # noqa: E731
    else:
        jobs = [(s, min(s + CHUNK, spec.samples)) for s in range(0, spec.samples, CHUNK)]
        fn = lambda se: _state_chunk(spec, cols, *se)  # noqa: E731
    if workers == 1 or len(jobs) == 1:
        parts = [fn(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, jobs))
    values = np.concatenate(parts, axis=0)
    count = values.shape[0]
    moments = tuple(_fsum_mean(values[:, -4 + k]) for k in range(4))
    stats = []
    for k, c in enumerate(cols):
        v = values[:, k]
        stats.append(ObservableStat(
            c.observable, c.nu, _fsum_mean(v), batch_mean_stderr(v), count,
            theory_value(spec, c, moments),
        ))
    meta = {
        "spec": spec.to_dict(),
        "version": __version__,
        "wall_time": time.perf_counter() - t0,
        "samples": count,
        "moment_means": dict(zip(("p2", "p3", "p4", "p2_sq"), moments)),
    }
    if spec.is_model:
        meta["realizations"] = n_realizations(spec)
        meta["vectors_per_realization"] = vectors_per_realization(spec)
        meta["window"] = spec.window or "full"
        meta["shuffled"] = spec.shuffle
    return ExperimentRecord(spec, stats, meta, values if keep_values else None)


def sweep(spec, axis, values, workers=None):
    """One record per value of ``axis``; returns ``[(value, record), ...]``."""
    if axis not in SWEEPABLE:
        raise SpecError(f"cannot sweep {axis!r}; sweepable fields: {SWEEPABLE}")
    values = list(values)
    if not values:
        raise SpecError("sweep needs at least one value")
    out = []
    for v in values:
        if axis == "n":
            s = spec.replace(N=2 ** int(v))
        elif axis in ("N", "M", "samples", "seed", "realizations"):
            s = spec.replace(**{axis: int(v)})
        elif axis == "gamma":
            s = spec.replace(gamma=str(v))
        else:
            s = spec.replace(**{axis: float(v)})
        out.append((v, run_experiment(s, workers=workers)))
    return out


@dataclass
class TheoryReport:
    lines: list
    passed: bool
    threshold: float = Z_THRESHOLD

    def format(self):
        buf = []
        for ln in self.lines:
            z = ln["z_score"]
            buf.append(
                f"{'PASS' if ln['passed'] else 'FAIL'} {ln['observable']}[nu={ln['nu'] or '-'}] "
                f"mean={ln['mean']:.6g} +- {ln['stderr']:.2g} theory={ln['theory']:.6g} "
                f"z={z:+.2f} rel={ln['rel_dev']:+.3%}"
            )
        return "\n".join(buf)


def compare_with_theory(record, threshold=Z_THRESHOLD, strict=False):
    """z-scores of every observable that has a theory value.

    Raises NoTheoryAvailable if no observable has one (or, with ``strict``,
    if any observable lacks one).
    """
    lines = []
    missing = []
    for s in record.stats:
        if s.theory is None:
            missing.append(f"{s.observable}[{s.nu}]")
            continue
        z = s.z_score
        lines.append(dict(
            observable=s.observable, nu=s.nu, mean=s.mean, stderr=s.stderr,
            theory=s.theory, z_score=z, rel_dev=s.rel_dev if s.rel_dev is not None else 0.0,
            passed=abs(z) <= threshold,
        ))
    if not lines or (strict and missing):
        raise NoTheoryAvailable(f"no theory for {', '.join(missing) or 'any observable'}")
    return TheoryReport(lines, all(ln["passed"] for ln in lines), threshold)


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def records_to_csv(records, axis=None):
    """CSV text for ``[record, ...]`` or, with ``axis``, ``[(value, record), ...]``."""
    buf = io.StringIO()
    cols = (("axis_value",) if axis else ()) + CSV_COLUMNS
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for item in records:
        value, rec = item if axis else (None, item)
        for row in rec.rows(axis_value=value):
            w.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def records_to_json(records, axis=None):
    items = []
    for item in records:
        value, rec = item if axis else (None, item)
        items.append({"axis": axis, "axis_value": value, "metadata": rec.metadata, "rows": rec.rows(value)})
    return json.dumps({"version": __version__, "records": items}, indent=2, default=str)


def gnuplot_script(csv_path, axis=None):
    """Companion gnuplot script for a CSV written by :func:`records_to_csv`."""
    xcol = 1 if axis else 2
    xlabel = axis or "N"
    obs_col = 6 if axis else 5
    mean_col, err_col = obs_col + 1, obs_col + 2
    return (
        "set datafile separator ','\n"
        f"set xlabel '{xlabel}'\nset ylabel 'mean'\nset key outside\n"
        f"plot '{csv_path}' every ::1 using {xcol}:{mean_col}:{err_col} with yerrorbars "
        f"title 'Monte Carlo', '' every ::1 using {xcol}:{mean_col + 3} with points pt 7 title 'theory'\n"
    )
