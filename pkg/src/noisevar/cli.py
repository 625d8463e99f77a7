"""Command-line front end.

Verbs: ``simulate``, ``estimate``, ``compare``, ``diagnose``.  All numeric
output comes from the library; this module only moves columns around.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import sys
import traceback
from dataclasses import dataclass, replace

import click
import numpy as np

from . import analysis, baselines, csvio, plotting, signals
from .errors import ConfigError, FitError, InputError, ScenarioError
from .estimator import EstimatorConfig, GAUSSIAN_MAD_SCALE, Variability, run_algorithm1

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

ESTIMATORS = ("alg1-mad", "alg1-mean", "mehra", "als", "all")


@dataclass(frozen=True)
class RunConfig:
    input: str | None = None
    scenario: str | None = None
    estimator: str = "alg1-mad"
    K: float = 0.9902
    m: int = 100
    a: float = GAUSSIAN_MAD_SCALE
    lags: int = baselines.DEFAULT_LAGS
    output: str = "-"
    plot: str | None = None
    seed: int | None = None

    def estimator_config(self, variability=Variability.MAD) -> EstimatorConfig:
        return EstimatorConfig(K=self.K, m=self.m, a=self.a, variability=variability)


def load_input(run: RunConfig) -> csvio.Measurements:
    if (run.input is None) == (run.scenario is None):
        raise click.UsageError("give exactly one of --input or --scenario")
    if run.input is not None:
        return csvio.read_measurements(run.input)
    spec = signals.load_scenario(run.scenario)
    if run.seed is not None:
        spec = replace(spec, seed=run.seed)
    sc = signals.generate(spec)
    return csvio.Measurements(y=sc.y, x=sc.x, r_true=sc.r_true, t=sc.t)


def _traces(run: RunConfig, y: np.ndarray) -> dict:
    """Run the requested estimators; keys are column suffixes."""
    names = ["alg1-mad", "alg1-mean", "mehra", "als"] if run.estimator == "all" else [run.estimator]
    out = {}
    for name in names:
        if name == "alg1-mad":
            trace = run_algorithm1(y, run.estimator_config(Variability.MAD))
        elif name == "alg1-mean":
            trace = run_algorithm1(y, run.estimator_config(Variability.MEAN))
        else:
            trace = baselines.run_baseline(y, run.estimator_config(), name, L=run.lags)
        out[name.replace("-", "_")] = trace
    return out


def estimate_table(run: RunConfig, data: csvio.Measurements) -> tuple[dict, dict]:
    traces = _traces(run, data.y)
    first = next(iter(traces.values()))
    cols = {"k": first.k, "y": first.y, "eta": first.eta}
    r_true = None if data.r_true is None else data.r_true[1:]
    if len(traces) == 1:
        (name, tr), = traces.items()
        cols["c_hat"] = tr.c_hat
        cols["r_hat"] = tr.r_hat
        if tr.q_hat is not None:
            cols["q_hat"] = tr.q_hat
        if r_true is not None:
            cols["r_true"] = r_true
            cols["err"] = tr.r_hat - r_true
        cols["warmup"] = tr.warmup
        if tr.q_hat is not None:
            cols["flag"] = tr.flag
    else:
        for name, tr in traces.items():
            cols[f"r_hat_{name}"] = tr.r_hat
            if tr.q_hat is not None:
                cols[f"q_hat_{name}"] = tr.q_hat
        if r_true is not None:
            cols["r_true"] = r_true
        cols["warmup"] = first.warmup
    return cols, traces


def comparison_svg(data: csvio.Measurements, traces: dict) -> bytes:
    t = data.t if data.t is not None else np.arange(data.y.size, dtype=float)
    std = {name: np.concatenate(([np.nan], np.sqrt(tr.r_hat))) for name, tr in traces.items()}
    fig = plotting.comparison_figure(
        t, data.y, std, x=data.x,
        true_std=None if data.r_true is None else np.sqrt(data.r_true),
    )
    return plotting.render(fig, "svg")


# -- click wiring -------------------------------------------------------------

def _common(f):
    options = [
        click.option("--input", "input_", type=str, help="CSV with a 'y' column (optional 'x', 'r_true')."),
        click.option("--scenario", type=str, help="Scenario file to simulate instead of reading --input."),
        click.option("--seed", type=int, help="Override the scenario seed."),
        click.option("--gain", "K", type=float, default=0.9902, show_default=True, help="Predictor gain K in (0, 1)."),
        click.option("--window", "m", type=int, default=100, show_default=True, help="Window length m."),
        click.option("--mad-scale", "a", type=float, default=GAUSSIAN_MAD_SCALE, show_default=True),
        click.option("--lags", type=int, default=baselines.DEFAULT_LAGS, show_default=True,
                     help="Highest autocovariance lag for the baselines."),
        click.option("--output", type=str, default="-", show_default=True, help="Output CSV path, '-' for stdout."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _run(input_, scenario, seed, K, m, a, lags, output, **extra) -> RunConfig:
    if lags < 1:
        raise click.BadParameter("must be at least 1", param_hint="--lags")
    return RunConfig(input=input_, scenario=scenario, seed=seed, K=K, m=m, a=a, lags=lags, output=output, **extra)


@click.group()
@click.version_option(package_name="artifact", prog_name="noisevar")
def cli():
    """Measurement-noise variance estimation from innovation statistics."""


@cli.command()
@click.option("--scenario", required=True, type=str, help="Scenario file.")
@click.option("--seed", type=int, help="Override the scenario seed.")
@click.option("--output", type=str, default="-", show_default=True)
def simulate(scenario, seed, output):
    """Generate a scenario as CSV with columns k,t,x,y,r_true."""
    spec = signals.load_scenario(scenario)
    if seed is not None:
        spec = replace(spec, seed=seed).validate()
    sc = signals.generate(spec)
    text = csvio.format_table(
        {"k": np.arange(sc.y.size), "t": sc.t, "x": sc.x, "y": sc.y, "r_true": sc.r_true}
    )
    csvio.write_text(output, text)


@cli.command()
@_common
@click.option("--estimator", type=click.Choice(ESTIMATORS), default="alg1-mad", show_default=True)
@click.option("--plot", type=str, help="Also write an SVG figure here.")
def estimate(estimator, plot, **kw):
    """Run one estimator (or all) and write per-step estimates."""
    run = _run(**kw, estimator=estimator, plot=plot)
    data = load_input(run)
    cols, traces = estimate_table(run, data)
    svg = comparison_svg(data, traces) if plot else None
    csvio.write_text(run.output, csvio.format_table(cols))
    if svg is not None:
        csvio.write_text(plot, svg)


@cli.command()
@_common
@click.option("--plot", type=str, required=True, help="SVG output path.")
def compare(plot, **kw):
    """Run all estimators; write the combined CSV and a two-panel SVG."""
    run = _run(**kw, estimator="all", plot=plot)
    data = load_input(run)
    cols, traces = estimate_table(run, data)
    svg = comparison_svg(data, traces)
    csvio.write_text(run.output, csvio.format_table(cols))
    csvio.write_text(plot, svg)


@cli.command()
@_common
def diagnose(**kw):
    """Per-window decomposition of the mean-variance estimate.

    Needs the true signal in an 'x' column.
    """
    run = _run(**kw)
    data = load_input(run)
    if data.x is None:
        raise InputError("diagnose needs the true signal: the input has no 'x' column")
    run.estimator_config()  # validates K and m
    d = analysis.diagnose(data.x, data.y, run.K, run.m, data.r_true)
    cols = {
        "k": d.k, "s11": d.s11, "s22": d.s22, "s12": d.s12, "c_hat": d.c_hat,
        "predicted_bias": d.predicted_bias, "realized_err": d.realized_err, "warmup": d.warmup,
    }
    csvio.write_text(run.output, csvio.format_table(cols))


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="noisevar", standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except (InputError, ScenarioError, FitError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
