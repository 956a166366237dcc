"""Command line interface: ``entloc predict | sample | model | sweep``."""

import math
import sys
from pathlib import Path

import click

from . import theory
from .errors import EntlocError, NoTheoryAvailable
from .harness import (
    EnsembleSpec,
    compare_with_theory,
    gnuplot_script,
    records_to_csv,
    records_to_json,
    run_experiment,
    sweep,
)

FORMULAS = ("tau1", "tau-cue", "tau-phase", "tau2", "s-cue", "s-first-order", "tau-adjacent", "chi")


def _parse_partitions(text, n_qubits):
    """'1,2,n/2' -> (1, 2, n//2); '0+3' is the explicit subset {0, 3}."""
    if not text:
        return (1,)
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok == "n/2":
            if n_qubits is None:
                raise click.BadParameter("n/2 needs N = 2**n", param_hint="--partitions")
            out.append(n_qubits // 2)
        elif "+" in tok:
            out.append(tuple(int(i) for i in tok.split("+")))
        else:
            out.append(int(tok))
    return tuple(out)


def _parse_list(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Entanglement versus localization of random and physical wavefunctions."""


@main.command()
@click.option("--formula", type=click.Choice(FORMULAS), required=True)
@click.option("--n", "n_dim", type=int, help="Hilbert-space dimension N.")
@click.option("--m", "m", type=float, help="Support size M.")
@click.option("--nu", type=int, default=1, show_default=True)
@click.option("--p2", type=float, help="Mean p2 (defaults to the flat value 1/M).")
@click.option("--p3", type=float)
@click.option("--p4", type=float)
@click.option("--p2sq", type=float, help="Mean of p2 squared.")
@click.option("--variant", type=click.Choice(["consistent", "literal"]), default="consistent")
@click.option("--mode", type=click.Choice(["exact", "power-of-two"]), default="power-of-two")
@click.option("--r", "r", type=int, help="chi: order r.")
@click.option("--x", "x", type=float, help="chi: argument x.")
def predict(formula, n_dim, m, nu, p2, p3, p4, p2sq, variant, mode, r, x):
    """Print one closed-form prediction."""
    def need(**kw):
        for k, v in kw.items():
            if v is None:
                raise click.UsageError(f"--formula {formula} needs --{k}")

    try:
        if formula == "chi":
            need(r=r, x=x)
            val = theory.chi_r(r, x)
        elif formula == "s-cue":
            need(n=n_dim)
            val = theory.predict_cue_entropy(n_dim)
        elif formula in ("tau-cue", "tau-phase"):
            need(n=n_dim, m=m)
            fn = theory.predict_tau_localized_cue if formula == "tau-cue" else theory.predict_tau_phase
            val = fn(n_dim, m)
        else:
            need(n=n_dim)
            if p2 is None:
                need(m=m)
                p2 = 1.0 / m
            if formula == "tau1":
                val = theory.predict_tau_mean(n_dim, p2)
            elif formula == "s-first-order":
                val = theory.predict_entropy_first_order(n_dim, nu, p2, variant)
            elif formula == "tau-adjacent":
                need(m=m)
                n = round(math.log2(n_dim))
                val = theory.predict_tau_adjacent(n_dim, m, n, p2, mode.replace("-", "_"))
            else:  # tau2
                if None in (p3, p4, p2sq):
                    need(m=m)
                    mom = theory.flat_moments(m)
                else:
                    mom = theory.MomentInputs(p2, p3, p4, p2sq)
                val = theory.predict_tau_second_moment(n_dim, mom)
    except EntlocError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(repr(float(val)))


def ensemble_options(fn):
    opts = [
        click.option("--partitions", default="1", show_default=True, help="e.g. 1,2,n/2 or 0+3"),
        click.option("--observables", default="tau", show_default=True),
        click.option("--samples", type=int, default=1000, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path)),
        click.option("--gnuplot", is_flag=True, help="Also write OUT.gp."),
        click.option("--compare-theory", is_flag=True, help="Exit non-zero if any |z| > 3."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def state_options(fn):
    opts = [
        click.option("--n", "n_dim", type=int, help="Dimension N."),
        click.option("--m", "m", type=int),
        click.option("--l", "length", type=float),
        click.option("--wrap/--no-wrap", default=True, show_default=True, help="Cyclic adjacent windows."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def model_options(fn):
    opts = [
        click.option("--qubits", type=int),
        click.option("--sites", type=int),
        click.option("--delta-ratio", type=float, default=1.0, show_default=True),
        click.option("--j-over-delta", type=float, default=1.5, show_default=True),
        click.option("--gamma", default="1/3", show_default=True),
        click.option("--disorder", type=float, default=1.0, show_default=True),
        click.option("--realizations", type=int),
        click.option("--shuffle", is_flag=True),
        click.option("--window", type=click.Choice(["central50"])),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _dimension(n_dim, qubits, sites):
    if qubits is not None:
        return 2**qubits
    if sites is not None:
        return sites
    if n_dim is None:
        raise click.UsageError("give --n, --qubits or --sites")
    return n_dim


def _build_spec(source, n_dim, qubits=None, sites=None, m=None, length=None, wrap=True,
                partitions="1", observables="tau", samples=1000, seed=0, **model):
    N = _dimension(n_dim, qubits, sites)
    n_qubits = N.bit_length() - 1 if N & (N - 1) == 0 else None
    return EnsembleSpec(
        source=source, N=N, M=m, l=length, wrap=wrap,
        partitions=_parse_partitions(partitions, n_qubits),
        observables=_parse_list(observables), samples=samples, seed=seed,
        **{k: v for k, v in model.items() if v is not None},
    )


def _emit(records, out, gnuplot, compare, axis=None):
    text = records_to_csv(records, axis=axis)
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text)
        out.with_suffix(".json").write_text(records_to_json(records, axis=axis))
        if gnuplot:
            out.with_suffix(".gp").write_text(gnuplot_script(out.name, axis))
    if compare:
        ok = True
        for item in records:
            rec = item[1] if axis else item
            try:
                rep = compare_with_theory(rec)
            except NoTheoryAvailable as exc:
                click.echo(f"no theory: {exc}", err=True)
                ok = False
                continue
            click.echo(rep.format(), err=True)
            ok = ok and rep.passed
        if not ok:
            sys.exit(1)


def _run(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except EntlocError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command()
@click.option("--source", required=True)
@state_options
@ensemble_options
def sample(source, n_dim, m, length, wrap, partitions, observables, samples, seed, out, gnuplot,
           compare_theory):
    """Monte Carlo over a random-vector ensemble."""
    spec = _run(_build_spec, source, n_dim, m=m, length=length, wrap=wrap, partitions=partitions,
                observables=observables, samples=samples, seed=seed)
    rec = _run(run_experiment, spec)
    _emit([rec], out, gnuplot, compare_theory)


@main.command()
@click.argument("kind", type=click.Choice(["spin", "isrm", "anderson"]))
@click.option("--n", "n_dim", type=int, help="Dimension N (alternative to --qubits/--sites).")
@model_options
@ensemble_options
def model(kind, n_dim, qubits, sites, delta_ratio, j_over_delta, gamma, disorder, realizations,
          shuffle, window, partitions, observables, samples, seed, out, gnuplot, compare_theory):
    """Eigenvector statistics of a physical model."""
    spec = _run(_build_spec, f"model:{kind}", n_dim, qubits=qubits, sites=sites,
                partitions=partitions, observables=observables, samples=samples, seed=seed,
                delta_ratio=delta_ratio, j_over_delta=j_over_delta, gamma=gamma,
                disorder=disorder, realizations=realizations, shuffle=shuffle, window=window)
    rec = _run(run_experiment, spec)
    _emit([rec], out, gnuplot, compare_theory)


@main.command("sweep")
@click.option("--axis", required=True)
@click.option("--values", required=True, help="Comma-separated values.")
@click.option("--source", required=True, help="Any sample source or model:spin|isrm|anderson.")
@state_options
@model_options
@ensemble_options
def sweep_cmd(axis, values, source, n_dim, m, length, wrap, qubits, sites, delta_ratio,
              j_over_delta, gamma, disorder, realizations, shuffle, window, partitions,
              observables, samples, seed, out, gnuplot, compare_theory):
    """Repeat a sample/model run over one parameter."""
    vals = _parse_list(values)
    if not vals:
        raise click.UsageError("--values is empty")
    if n_dim is None and qubits is None and sites is None and axis == "n":
        n_dim = 2 ** int(vals[0])
    if n_dim is None and qubits is None and sites is None and axis == "N":
        n_dim = int(vals[0])
    if m is None and axis == "M":
        m = int(vals[0])
    if length is None and axis == "l":
        length = float(vals[0])
    spec = _run(_build_spec, source, n_dim, qubits=qubits, sites=sites, m=m, length=length,
                wrap=wrap, partitions=partitions, observables=observables, samples=samples,
                seed=seed, delta_ratio=delta_ratio, j_over_delta=j_over_delta, gamma=gamma,
                disorder=disorder, realizations=realizations, shuffle=shuffle, window=window)
    results = _run(sweep, spec, axis, vals)
    _emit(results, out, gnuplot, compare_theory, axis=axis)


if __name__ == "__main__":
    main()
