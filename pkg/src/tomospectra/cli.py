"""Command-line surface: predictions, planning, simulation, analysis.

Every subcommand validates its flags before doing work and emits either
a human table (default) or machine JSON (``--format json``).  Machine
output carries full double precision; tables round to 6 significant
digits.  Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

import json
import os
import sys
import time

import click
import numpy as np

from . import __version__, models
from .ensemble import (
    COMPLETE,
    OVERCOMPLETE,
    EnsembleIOError,
    EnsembleRunError,
    ExperimentConfig,
    load_ensemble,
    run_ensemble,
    save_ensemble,
)
from .gof import estimate_rank
from .pauli import StateSpec
from .sampling import MULTINOMIAL, POISSON, CountModel

_STATE_ALIASES = {
    "wn": "white_noise",
    "white-noise": "white_noise",
    "white_noise": "white_noise",
    "pure": "pure_plus_noise",
    "pure_plus_noise": "pure_plus_noise",
    "rank": "rank_r_plus_noise",
    "rank_r_plus_noise": "rank_r_plus_noise",
    "ghz": "ghz_plus_noise",
    "ghz_plus_noise": "ghz_plus_noise",
    "dicke": "dicke_plus_noise",
    "dicke_plus_noise": "dicke_plus_noise",
}

HISTOGRAM_FILE = "histogram.csv"
OVERLAY_FILE = "overlay.csv"
SUMMARY_FILE = "summary.json"


def _format_option(fn):
    return click.option(
        "--format", "fmt", type=click.Choice(["json", "table"]), default="table",
        show_default=True, help="machine JSON or a human-readable table")(fn)


def _fmt_value(value):
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return "%.6g" % value
    return str(value)


def _emit(doc, fmt):
    """Print a flat-ish result dict as JSON or an aligned key/value table."""
    if fmt == "json":
        click.echo(json.dumps(doc, indent=2, sort_keys=True))
        return
    flat = []
    for key, value in doc.items():
        if isinstance(value, dict):
            for sub, subval in value.items():
                flat.append(("%s.%s" % (key, sub), _fmt_value(subval)))
        else:
            flat.append((key, _fmt_value(value)))
    width = max(len(k) for k, _ in flat)
    for key, value in flat:
        click.echo("%-*s  %s" % (width, key, value))


def _bad(message, hint):
    return click.BadParameter(message, param_hint=hint)


@click.group()
@click.version_option(version=__version__, prog_name="tomospectra")
def cli():
    """Eigenvalue spectra of linearly reconstructed quantum states."""


# ---------------------------------------------------------------------------
# predict / min-counts: pure analytics
# ---------------------------------------------------------------------------


@cli.command()
@click.option("--qubits", type=int, required=True, help="number of qubits n")
@click.option("--counts", type=int, required=True, help="events per setting N")
@click.option("--q", type=float, default=0.0, show_default=True,
              help="signal weight of the q*signal + (1-q)*I/2^n mix")
@click.option("--rank", "rank", type=int, default=None,
              help="signal rank r  [default: 0 for q=0, else 1]")
@_format_option
def predict(qubits, counts, q, rank, fmt):
    """Predict the noise-bulk semicircle for given n, N, q, r."""
    if not 1 <= qubits <= models.MAX_QUBITS_ANALYTIC:
        raise _bad("must lie in 1..%d" % models.MAX_QUBITS_ANALYTIC, "--qubits")
    if counts < 1:
        raise _bad("must be a positive event count", "--counts")
    if not 0.0 <= q < 1.0:
        raise _bad("must lie in [0, 1); the bulk vanishes at q=1", "--q")
    if rank is None:
        rank = 0 if q == 0.0 else 1
    if not 0 <= rank < 2**qubits:
        raise _bad("must lie in 0..2^n-1", "--rank")
    center = models.semicircle_center(qubits, q, rank)
    # a single signal eigenvalue barely deforms the bulk, so its radius
    # is quoted without the rank correction; explicit r > 1 gets it
    effective_r = 0 if rank == 1 and q > 0 else rank
    radius = models.semicircle_radius(qubits, counts, effective_r)
    model = models.SemicircleModel(center=center, radius=radius)
    doc = {
        "qubits": qubits,
        "counts": counts,
        "signal_weight": q,
        "rank": rank,
        "center": center,
        "radius": radius,
        "width": 2.0 * radius,
        "physicality_probability": models.physicality_probability(model, qubits),
    }
    if q > 0:
        doc["min_counts"] = models.min_counts(qubits, q)
    _emit(doc, fmt)


@cli.command("min-counts")
@click.option("--qubits", type=int, required=True, help="number of qubits n")
@click.option("--q", type=float, required=True,
              help="signal weight of the q*signal + (1-q)*I/2^n mix")
@_format_option
def min_counts_cmd(qubits, q, fmt):
    """Smallest per-setting N keeping the whole noise bulk positive."""
    if not 1 <= qubits <= models.MAX_QUBITS_ANALYTIC:
        raise _bad("must lie in 1..%d" % models.MAX_QUBITS_ANALYTIC, "--qubits")
    if not 0.0 <= q < 1.0:
        raise _bad("must lie in [0, 1): the required count diverges as q -> 1",
                   "--q")
    value = models.min_counts(qubits, q)
    if fmt == "table":
        click.echo(str(value))
    else:
        _emit({"qubits": qubits, "signal_weight": q, "min_counts": value}, fmt)


# ---------------------------------------------------------------------------
# simulate: Monte-Carlo ensembles on disk
# ---------------------------------------------------------------------------


def _build_state_spec(qubits, state, q, state_rank, excitations, state_seed):
    kind = _STATE_ALIASES.get(state.lower().strip())
    if kind is None:
        raise _bad("unknown state %r (use wn, pure, rank, ghz or dicke)" % state,
                   "--state")
    try:
        return StateSpec(kind=kind, n=qubits, q=q, r=state_rank, k=excitations,
                         seed=state_seed)
    except ValueError as exc:
        raise click.UsageError("invalid state: %s" % exc)


@cli.command()
@click.option("--qubits", type=int, required=True, help="number of qubits n")
@click.option("--state", default="wn", show_default=True,
              help="ground truth: wn, pure, rank, ghz or dicke")
@click.option("--q", type=float, default=0.0, show_default=True,
              help="signal weight (0 for white noise)")
@click.option("--state-rank", type=int, default=1, show_default=True,
              help="signal rank for --state rank")
@click.option("--excitations", type=int, default=3, show_default=True,
              help="excitation number for --state dicke")
@click.option("--state-seed", type=int, default=0, show_default=True,
              help="seed of the random signal subspace (pure/rank states)")
@click.option("--scheme", type=click.Choice([OVERCOMPLETE, COMPLETE]),
              default=OVERCOMPLETE, show_default=True)
@click.option("--counts", type=int, default=None,
              help="events per setting (overcomplete scheme)")
@click.option("--count-mode", type=click.Choice([MULTINOMIAL, POISSON]),
              default=MULTINOMIAL, show_default=True,
              help="fixed totals per setting, or Poissonian totals")
@click.option("--total-counts", type=float, default=None,
              help="overall event budget (complete scheme)")
@click.option("--reps", type=int, required=True, help="number of replicas")
@click.option("--seed", type=int, default=0, show_default=True,
              help="master seed; every replica/setting derives from it")
@click.option("--threads", type=int, default=None,
              help="worker processes [default: $TOMOSPECTRA_THREADS or 1]")
@click.option("--out", type=click.Path(file_okay=False), required=True,
              help="directory for config.json/spectra.csv/checksum.txt")
@_format_option
def simulate(qubits, state, q, state_rank, excitations, state_seed, scheme,
             counts, count_mode, total_counts, reps, seed, threads, out, fmt):
    """Run repeated tomography simulations and store the spectra."""
    if reps < 1:
        raise _bad("must be a positive replica count", "--reps")
    if seed < 0:
        raise _bad("must be nonnegative", "--seed")
    if threads is not None and threads < 1:
        raise _bad("must be at least 1", "--threads")
    spec = _build_state_spec(qubits, state, q, state_rank, excitations, state_seed)
    if scheme == OVERCOMPLETE:
        if counts is None:
            raise _bad("required for the overcomplete scheme", "--counts")
        if total_counts is not None:
            raise _bad("applies to the complete scheme only", "--total-counts")
        try:
            config = ExperimentConfig.overcomplete(
                spec, CountModel(mode=count_mode, events_per_setting=counts),
                replicas=reps, master_seed=seed)
        except ValueError as exc:
            raise click.UsageError(str(exc))
    else:
        if total_counts is None:
            raise _bad("required for the complete scheme", "--total-counts")
        if counts is not None:
            raise _bad("applies to the overcomplete scheme only", "--counts")
        try:
            config = ExperimentConfig.complete(
                spec, total_counts, replicas=reps, master_seed=seed)
        except ValueError as exc:
            raise click.UsageError(str(exc))

    started = time.time()
    with click.progressbar(length=reps, label="replicas", file=sys.stderr) as bar:
        state_done = [0]

        def advance(done, total):
            bar.update(done - state_done[0])
            state_done[0] = done

        result = run_ensemble(config, workers=threads, progress=advance)
    save_ensemble(result, out)
    doc = result.summary()
    doc["master_seed"] = seed
    doc["out"] = str(out)
    doc["elapsed_seconds"] = round(time.time() - started, 3)
    _emit(doc, fmt)


# ---------------------------------------------------------------------------
# analyze: histogram + model overlay for a stored ensemble
# ---------------------------------------------------------------------------


def _overlay_model(config):
    """Pick the analytic eigenvalue law matching an ensemble's config."""
    state = config.state
    n = state.n
    if config.scheme == COMPLETE:
        model = models.laplace_model(n, config.total_counts)
        return model, {"family": "laplace", "center": model.center,
                       "alpha": model.alpha}
    counts = config.count_model.events_per_setting
    if n == 1 and state.kind == "white_noise":
        model = models.single_qubit_density(counts)
        return model, {"family": "single_qubit", "counts": counts,
                       "normalization": model.normalization}
    if state.kind == "white_noise":
        q, r = 0.0, 0
    elif state.kind == "rank_r_plus_noise":
        q, r = state.q, state.r
    else:
        q, r = state.q, 1
    center = models.semicircle_center(n, q, r)
    effective_r = 0 if r == 1 and q > 0 else r
    radius = models.semicircle_radius(n, counts, effective_r)
    model = models.SemicircleModel(center=center, radius=radius)
    return model, {"family": "semicircle", "center": center, "radius": radius,
                   "width": 2.0 * radius}


def _sup_cdf_distance(sorted_values, cdf):
    """Kolmogorov distance between the empirical CDF and a model CDF."""
    m = sorted_values.size
    theory = np.asarray(cdf(sorted_values), dtype=float)
    upper = np.abs(np.arange(1, m + 1) / m - theory).max()
    lower = np.abs(np.arange(0, m) / m - theory).max()
    return float(max(upper, lower))


@cli.command()
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False),
              required=True, help="ensemble directory (from simulate)")
@click.option("--bins", type=int, default=60, show_default=True,
              help="histogram bin count over the pooled eigenvalues")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="where to write the csv/json files [default: --in]")
@_format_option
def analyze(in_dir, bins, out_dir, fmt):
    """Summarize a stored ensemble: moments, histogram, model overlay."""
    if bins < 1:
        raise _bad("must be a positive bin count", "--bins")
    ensemble = load_ensemble(in_dir)
    out_dir = in_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)

    pooled = np.sort(ensemble.pooled)
    model, model_doc = _overlay_model(ensemble.config)

    edges = np.histogram_bin_edges(pooled, bins=bins)
    hist, _ = np.histogram(pooled, bins=edges)
    widths = np.diff(edges)
    density = hist / (pooled.size * widths)
    hist_lines = ["bin_left,bin_right,count,density"]
    for k in range(bins):
        hist_lines.append("%.17g,%.17g,%d,%.17g"
                          % (edges[k], edges[k + 1], hist[k], density[k]))

    # grid covering both the data range and the model's own scale
    lo = min(pooled[0], model_doc.get("center", pooled[0])
             - 1.2 * model_doc.get("radius", 0.0))
    hi = max(pooled[-1], model_doc.get("center", pooled[-1])
             + 1.2 * model_doc.get("radius", 0.0))
    grid = np.linspace(lo, hi, 513)
    overlay_lines = ["lambda,pdf,cdf"]
    pdf = model.pdf(grid)
    cdf = model.cdf(grid)
    for x, f, big_f in zip(grid, pdf, cdf):
        overlay_lines.append("%.17g,%.17g,%.17g" % (x, f, big_f))

    doc = ensemble.summary()
    doc["bins"] = bins
    doc["model"] = model_doc
    doc["sup_cdf_distance"] = _sup_cdf_distance(pooled, model.cdf)
    doc["files"] = {
        "histogram": os.path.join(out_dir, HISTOGRAM_FILE),
        "overlay": os.path.join(out_dir, OVERLAY_FILE),
        "summary": os.path.join(out_dir, SUMMARY_FILE),
    }
    with open(doc["files"]["histogram"], "w") as fh:
        fh.write("\n".join(hist_lines) + "\n")
    with open(doc["files"]["overlay"], "w") as fh:
        fh.write("\n".join(overlay_lines) + "\n")
    with open(doc["files"]["summary"], "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit(doc, fmt)


# ---------------------------------------------------------------------------
# rank-test: signal rank estimation from one spectrum
# ---------------------------------------------------------------------------


def _read_eigenvalue_file(path):
    with open(path) as fh:
        tokens = fh.read().replace(",", " ").split()
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise click.UsageError("cannot parse %s: %s" % (path, exc))


@cli.command("rank-test")
@click.option("--eigenvalues", "eig_file",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="text file with the 2^n measured eigenvalues")
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False),
              default=None, help="stored ensemble to pull a spectrum from")
@click.option("--replica", type=int, default=0, show_default=True,
              help="replica row used with --in")
@click.option("--counts", type=int, default=None,
              help="events per setting N [default: the ensemble's, with --in]")
@click.option("--qubits", type=int, default=None,
              help="qubit number; inferred from the eigenvalue count if omitted")
@click.option("--significance", type=float, default=0.05, show_default=True,
              help="acceptance threshold on the effective P-value")
@click.option("--max-rank", type=int, default=None,
              help="largest candidate rank to test [default: min(2^n-5, 10)]")
@_format_option
def rank_test(eig_file, in_dir, replica, counts, qubits, significance,
              max_rank, fmt):
    """Find the smallest signal rank with a semicircle-consistent remainder."""
    if (eig_file is None) == (in_dir is None):
        raise click.UsageError(
            "exactly one input is required: --eigenvalues or --in")
    if not 0.0 < significance < 1.0:
        raise _bad("must lie strictly between 0 and 1", "--significance")

    if eig_file is not None:
        eigs = _read_eigenvalue_file(eig_file)
        n = qubits if qubits is not None else max(eigs.size.bit_length() - 1, 0)
        if eigs.size != 2**n:
            raise _bad("file holds %d eigenvalues, expected 2^n%s"
                       % (eigs.size, " = %d" % 2**n if qubits is not None else ""),
                       "--eigenvalues")
        if counts is None:
            raise _bad("required with --eigenvalues: the noise radius scales "
                       "with the per-setting events", "--counts")
        source = str(eig_file)
    else:
        ensemble = load_ensemble(in_dir)
        if not 0 <= replica < ensemble.replicas:
            raise _bad("must lie in 0..%d" % (ensemble.replicas - 1), "--replica")
        eigs = ensemble.spectra[replica]
        n = ensemble.n
        if qubits is not None and qubits != n:
            raise _bad("ensemble holds %d-qubit spectra" % n, "--qubits")
        if counts is None:
            if ensemble.config.scheme != OVERCOMPLETE:
                raise _bad(
                    "required for complete-scheme ensembles: the rank test is "
                    "calibrated by per-setting events", "--counts")
            counts = ensemble.config.count_model.events_per_setting
        source = "%s:replica=%d" % (in_dir, replica)

    try:
        report = estimate_rank(eigs, n, counts, significance=significance,
                               max_rank=max_rank)
    except ValueError as exc:
        raise click.UsageError(str(exc))

    doc = report.to_json()
    doc["qubits"] = n
    doc["counts"] = counts
    doc["source"] = source
    if fmt == "json":
        _emit(doc, fmt)
        return
    header = ("rank", "center", "radius", "statistic", "p_value", "p_eff",
              "in_support", "signals")
    rows = [header]
    for c in report.candidates:
        rows.append((str(c.rank), "%.6g" % c.center, "%.6g" % c.radius,
                     "%.6g" % c.statistic, "%.6g" % c.p_value, "%.6g" % c.p_eff,
                     "yes" if c.in_support else "no", str(c.signal_count)))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    for row in rows:
        click.echo("  ".join("%*s" % (widths[i], cell)
                             for i, cell in enumerate(row)))
    if report.chosen_rank is None:
        click.echo("chosen rank: none accepted at significance %.6g"
                   % significance)
    else:
        click.echo("chosen rank: %d" % report.chosen_rank)


# ---------------------------------------------------------------------------
# entry point with the documented exit-code contract
# ---------------------------------------------------------------------------


def main(argv=None):
    """Run the CLI; returns 0 (ok), 1 (usage error) or 2 (runtime error)."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.Abort:
        click.echo("aborted", err=True)
        return 130
    except (EnsembleIOError, EnsembleRunError, OSError, ValueError) as exc:
        click.echo("error: %s" % exc, err=True)
        return 2
    return 0


def entrypoint():  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
