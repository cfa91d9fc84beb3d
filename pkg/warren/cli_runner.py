"""
Command-line runner for the Warren-process experiments.

Usage:
    warren simulate laguerre --m 2 --p 3 --t0 1 --t1 2 --paths 1000 --dt 1e-3 --seed 7
    warren oracle wishart --n 2 --p 2 --t 0.5 --draws 100000 --seed 7
    warren check identities --suite all --seed 7
    warren compare --model laguerre --m 2 --p 3 --n 2 --t0 1 --t1 2 --paths 10000
    warren rbm corner-stats --rbm-type all --paths 10000 --eps 0.05 0.02 0.01

Option values resolve as: built-in defaults, then ``--config file.json``, then
flags given on the command line.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ParameterError,
    PropagationError,
    UsageError,
    ValidationError,
    WarrenError,
)
from .gt_core import JacobiShape, LaguerreShape, PatternShape, interlacing_violations
from .identity_checks import (
    MC_SIGMAS,
    check_da_integral,
    check_kernel_normalization,
    mc_report,
    run_identity_suite,
)
from .oracles import (
    RngStream,
    sample_gibbs_pattern,
    sample_jacobi_eigs,
    sample_multilevel_jacobi_eigs,
    sample_multilevel_wishart_eigs,
    sample_wishart_eigs,
)
from .output import (
    coordinate_names,
    create_ecdf_figure,
    error_record,
    summary_lines,
    write_csv,
    write_ensemble_csv,
    write_json,
    write_plot_data,
    write_samples_csv,
)
from .rbm_quadrant import RBM_TYPES, builtin_spec, corner_ladder, simulate_gap_process
from .sder_engine import (
    INIT_FROM_ORACLE,
    PathEnsemble,
    SimConfig,
    simulate_eigenvalue_sde,
    simulate_left_edge,
    simulate_warren,
)
from .stats import (
    EmpiricalSample,
    compare_coordinates,
    double_collision_fraction,
    ecdf,
    histogram_density,
    ks_two_sample,
    min_gap_statistics,
    moments,
)

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "WARREN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
FORMATS = ("csv", "json")
SUITES = ("all", "harmonic", "faces", "dixon-anderson")
# oracle draws in `compare` use a stream no simulation chunk can reach
ORACLE_STREAM = 2**32
GAP_EPS = (0.05, 0.02, 0.01)


def _default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR)


@dataclass
class ExperimentConfig:
    """Fully resolved settings of one CLI invocation."""

    command: str = ""
    target: str = ""
    model: str = "laguerre"
    level: str = "laguerre"
    m: int = 2
    n: int = 2
    p: int = 3
    q: int = 3
    k: int = 2
    t: float = 1.0
    t0: float = 0.0
    t1: float = 1.0
    dt: float = 1e-3
    paths: int = 1000
    draws: int = 10000
    seed: int = 0
    record_stride: int = 100
    chunk_size: int = 2048
    workers: int = 1
    top: List[float] = field(default_factory=lambda: [1.0, 2.0])
    y: List[float] = field(default_factory=lambda: [1.0, 4.0])
    mc: int = 100000
    suite: str = "all"
    points: int = 1000
    max_n: int = 4
    rbm_type: str = "A"
    start: List[float] = field(default_factory=lambda: [1.0, 1.0])
    horizon: float = 1.0
    eps: List[float] = field(default_factory=lambda: list(GAP_EPS))
    bins: int = 50
    formats: List[str] = field(default_factory=lambda: list(FORMATS))
    plots: bool = False
    progress: bool = True
    log_level: str = "INFO"
    output_dir: str = field(default_factory=_default_output_dir)

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            try:
                if f.type is bool:
                    if not isinstance(value, bool):
                        raise TypeError(f"expected true/false, got {value!r}")
                elif f.type in (int, float, str):
                    value = f.type(value)
                elif f.type == List[float]:
                    value = [float(v) for v in value]
                elif f.type == List[str]:
                    value = [str(v) for v in value]
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"config field {f.name!r}: {exc}") from exc
            setattr(self, f.name, value)
        self.log_level = self.log_level.upper()
        if self.log_level not in LOG_LEVELS:
            raise ValidationError(f"log_level must be one of {LOG_LEVELS}, got {self.log_level!r}")
        unknown = sorted(set(self.formats) - set(FORMATS))
        if unknown:
            raise ValidationError(f"unknown output formats {unknown}; choose from {FORMATS}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        return cls(**data)

    def sim_config(self) -> SimConfig:
        return SimConfig(
            dt=self.dt,
            t0=self.t0,
            t1=self.t1,
            n_paths=self.paths,
            seed=self.seed,
            record_stride=self.record_stride,
            chunk_size=self.chunk_size,
            workers=self.workers,
            progress=self.progress,
        )

    @property
    def stem(self) -> str:
        return "_".join(part for part in (self.command, self.target) if part).replace("-", "_")


# ---------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------

_OPTIONS: Dict[str, Dict[str, Any]] = {
    "model": dict(choices=("laguerre", "jacobi", "left-edge"), help="Process family"),
    "level": dict(choices=("laguerre", "jacobi"), help="Eigenvalue SDE family"),
    "m": dict(type=int, help="Number of levels of the Laguerre pattern"),
    "n": dict(type=int, help="Matrix rows / pattern level"),
    "p": dict(type=int, help="Parameter p (columns of the Gaussian matrix)"),
    "q": dict(type=int, help="Parameter q of the Jacobi family"),
    "k": dict(type=int, help="Number of levels of the Jacobi pattern"),
    "t": dict(type=float, help="Time of the oracle law"),
    "t0": dict(type=float, help="Start time"),
    "t1": dict(type=float, help="End time"),
    "dt": dict(type=float, help="Time step"),
    "paths": dict(type=int, help="Number of simulated paths"),
    "draws": dict(type=int, help="Number of oracle draws"),
    "seed": dict(type=int, help="Random seed"),
    "record_stride": dict(type=int, help="Record every this many steps"),
    "chunk_size": dict(type=int, help="Paths per chunk"),
    "workers": dict(type=int, help="Threads running chunks"),
    "top": dict(type=float, nargs="+", help="Top row of the pattern"),
    "y": dict(type=float, nargs="+", help="Level-n point"),
    "mc": dict(type=int, help="Monte Carlo draws"),
    "suite": dict(choices=SUITES, help="Identity suite"),
    "points": dict(type=int, help="Random evaluation points per identity"),
    "max_n": dict(type=int, help="Largest level size in the identity suite"),
    "rbm_type": dict(choices=RBM_TYPES + ("all",), help="Builtin gap system"),
    "start": dict(type=float, nargs=2, help="Starting gap vector"),
    "horizon": dict(type=float, help="Simulation horizon of the gap process"),
    "eps": dict(type=float, nargs="+", help="Thresholds for corner/collision statistics"),
    "bins": dict(type=int, help="Histogram bins in plot data"),
}

SIM_OPTIONS = ("t0", "t1", "dt", "paths", "seed", "record_stride", "chunk_size", "workers")

LEAVES: Dict[Tuple[str, str], Tuple[str, ...]] = {
    ("simulate", "laguerre"): ("m", "p", *SIM_OPTIONS, "eps", "bins"),
    ("simulate", "jacobi"): ("p", "q", "k", *SIM_OPTIONS, "eps", "bins"),
    ("simulate", "left-edge"): ("p", *SIM_OPTIONS, "eps", "bins"),
    ("simulate", "eigen-sde"): ("level", "n", "p", "q", *SIM_OPTIONS, "eps", "bins"),
    ("oracle", "wishart"): ("n", "p", "t", "draws", "seed", "bins"),
    ("oracle", "multilevel-wishart"): ("m", "p", "t", "draws", "seed", "bins"),
    ("oracle", "jacobi"): ("n", "p", "q", "draws", "seed", "bins"),
    ("oracle", "multilevel-jacobi"): ("k", "p", "q", "draws", "seed", "bins"),
    ("sample", "gibbs"): ("model", "m", "p", "q", "k", "top", "draws", "seed"),
    ("check", "identities"): ("suite", "points", "seed", "max_n"),
    ("check", "da-integral"): ("n", "p", "y", "mc", "seed"),
    ("check", "kernel-norm"): ("n", "p", "y", "mc", "seed"),
    ("rbm", "simulate"): ("rbm_type", "start", "dt", "horizon", "paths", "seed", "record_stride"),
    ("rbm", "corner-stats"): ("rbm_type", "start", "dt", "horizon", "paths", "seed", "eps"),
    ("compare", ""): ("model", "m", "n", "p", "q", "k", *SIM_OPTIONS, "bins"),
}

_HELP = {
    "simulate": "Simulate a reflected particle system",
    "oracle": "Draw from an exact random-matrix law",
    "sample": "Draw exact Gibbs fillings of a pattern",
    "check": "Verify algebraic and integral identities",
    "rbm": "Gap processes near a triple point",
    "compare": "KS comparison of a simulation against its oracle",
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, help="JSON file of option values")
    parser.add_argument("--output-dir", type=str, help=f"Output directory (env {OUTPUT_DIR_ENV})")
    parser.add_argument("--formats", nargs="+", choices=FORMATS, help="Files to write")
    parser.add_argument("--log-level", type=str, choices=LOG_LEVELS, help="Logging level")
    parser.add_argument(
        "--no-progress", dest="progress", action="store_false", help="Disable progress bars"
    )
    parser.add_argument("--plots", action="store_true", help="Also render PNG figures")


class _Parser(argparse.ArgumentParser):
    """Parser whose errors surface as UsageError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="warren",
        description="Monte Carlo experiments for the Laguerre and Jacobi Warren processes",
        argument_default=argparse.SUPPRESS,
    )
    commands = parser.add_subparsers(dest="command", required=True)
    groups: Dict[str, Any] = {}
    for (command, target), names in LEAVES.items():
        if not target:
            leaf = commands.add_parser(
                command, help=_HELP[command], argument_default=argparse.SUPPRESS
            )
        else:
            if command not in groups:
                group = commands.add_parser(
                    command, help=_HELP[command], argument_default=argparse.SUPPRESS
                )
                groups[command] = group.add_subparsers(dest="target", required=True)
            leaf = groups[command].add_parser(target, argument_default=argparse.SUPPRESS)
        _add_common(leaf)
        for name in names:
            leaf.add_argument(_flag(name), dest=name, **_OPTIONS[name])
        leaf.set_defaults(command=command, target=target)
    return parser


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a JSON object whose keys mirror the long flag names."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    values = {str(key).replace("-", "_"): value for key, value in data.items()}
    if "no_progress" in values:
        values["progress"] = not values.pop("no_progress")
    for key in ("command", "target"):
        values.pop(key, None)
    return values


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    explicit = dict(vars(args))
    config_path = explicit.pop("config", None)
    merged: Dict[str, Any] = {}
    if config_path:
        merged.update(load_config_file(config_path))
    merged.update(explicit)
    return ExperimentConfig.from_dict(merged)


# ---------------------------------------------------------------------
# Shared output helpers
# ---------------------------------------------------------------------


def _out(cfg: ExperimentConfig, suffix: str) -> Path:
    return Path(cfg.output_dir) / f"{cfg.stem}{suffix}"


def _write_summary(cfg: ExperimentConfig, summary: Dict[str, Any]) -> None:
    if "json" in cfg.formats:
        write_json(_out(cfg, ".json"), summary, cfg.to_dict())


def _write_ecdfs(
    cfg: ExperimentConfig, label: str, curves: Dict[str, Tuple[np.ndarray, np.ndarray]]
) -> None:
    if "csv" in cfg.formats:
        for name, (x, y) in curves.items():
            write_plot_data(_out(cfg, f"_ecdf_{label}_{name}.csv"), x, y)
    if cfg.plots:
        create_ecdf_figure(curves, _out(cfg, f"_ecdf_{label}.png"), f"{cfg.stem} {label}")


def _write_histogram(cfg: ExperimentConfig, label: str, values: np.ndarray) -> None:
    if "csv" in cfg.formats:
        x, y = histogram_density(values, cfg.bins)
        write_plot_data(_out(cfg, f"_hist_{label}.csv"), x, y)


def _moment_table(samples: np.ndarray, names: Sequence[str]) -> Dict[str, Dict[str, float]]:
    return {name: moments(samples[:, j])._asdict() for j, name in enumerate(names)}


def _trace_check(trace: np.ndarray, target: float) -> Dict[str, Any]:
    stats = moments(trace)
    stderr = float(np.sqrt(stats.variance / trace.size))
    return {
        "trace_mean": stats.mean,
        "trace_stderr": stderr,
        "trace_target": target,
        "within_3se": bool(abs(stats.mean - target) <= 3.0 * stderr),
    }


# ---------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------


def _ensemble_summary(ensemble: PathEnsemble, eps: Sequence[float]) -> Dict[str, Any]:
    live = int((~ensemble.failed).sum())
    if live == 0:
        raise PropagationError("every path aborted; no statistics to report")
    top = ensemble.shape.n_levels
    final = ensemble.level(top)
    names = [f"l{top}_{j + 1}" for j in range(final.shape[1])]
    summary: Dict[str, Any] = {
        "model": ensemble.model,
        "params": ensemble.params,
        "n_paths": ensemble.n_paths,
        "n_records": ensemble.n_records,
        "failed_paths": ensemble.n_paths - live,
        "interlacing_violations": ensemble.violation_count(),
        "ledger_decreases": ensemble.ledger_decreases(),
        "final_top_level": _moment_table(final, names),
    }
    gaps = min_gap_statistics(ensemble)
    if gaps.pairs:
        summary["min_partner_gap"] = {
            f"{a}-{b}": float(gaps.path_min[:, j].min()) for j, (a, b) in enumerate(gaps.pairs)
        }
        summary["double_collision"] = {
            str(e): dict(zip(("fraction", "stderr"), double_collision_fraction(ensemble, e)))
            for e in eps
        }
    return summary


def _run_simulate(cfg: ExperimentConfig) -> int:
    sim = cfg.sim_config()
    if cfg.target == "laguerre":
        ensemble = simulate_warren("laguerre", {"m": cfg.m, "p": cfg.p}, INIT_FROM_ORACLE, sim)
    elif cfg.target == "jacobi":
        ensemble = simulate_warren(
            "jacobi", {"p": cfg.p, "q": cfg.q, "k": cfg.k}, INIT_FROM_ORACLE, sim
        )
    elif cfg.target == "left-edge":
        ensemble = simulate_left_edge(cfg.p, sim)
    else:
        ensemble = simulate_eigenvalue_sde(cfg.level, {"n": cfg.n, "p": cfg.p, "q": cfg.q}, sim)

    summary = _ensemble_summary(ensemble, cfg.eps)
    if "csv" in cfg.formats:
        write_ensemble_csv(_out(cfg, ".csv"), ensemble)
    final = ensemble.level(ensemble.shape.n_levels)
    _write_ecdfs(cfg, "final", {f"coord{j + 1}": ecdf(final[:, j]) for j in range(final.shape[1])})
    _write_histogram(cfg, "trace", final.sum(axis=1))
    _write_summary(cfg, summary)
    print(
        summary_lines(
            f"simulate {cfg.target}",
            {
                "paths": summary["n_paths"],
                "failed": summary["failed_paths"],
                "violations": summary["interlacing_violations"],
                "ledger decreases": summary["ledger_decreases"],
            },
        )
    )
    return 0


def _run_oracle(cfg: ExperimentConfig) -> int:
    rng = RngStream(cfg.seed)
    summary: Dict[str, Any] = {"draws": cfg.draws}
    if cfg.target == "wishart":
        samples = sample_wishart_eigs(cfg.n, cfg.p, cfg.t, rng, size=cfg.draws)
        names = [f"lambda{j + 1}" for j in range(samples.shape[1])]
        summary.update(_trace_check(samples.sum(axis=1), 2.0 * cfg.t * cfg.n * cfg.p))
    elif cfg.target == "jacobi":
        samples = sample_jacobi_eigs(cfg.n, cfg.p, cfg.q, rng, size=cfg.draws)
        names = [f"mu{j + 1}" for j in range(samples.shape[1])]
        if cfg.n == 1:
            summary.update(_trace_check(samples[:, 0], cfg.p / (cfg.p + cfg.q)))
    else:
        shape: PatternShape
        if cfg.target == "multilevel-wishart":
            shape = LaguerreShape(cfg.m, cfg.p)
            samples = sample_multilevel_wishart_eigs(cfg.m, cfg.p, cfg.t, rng, size=cfg.draws)
        else:
            shape = JacobiShape(cfg.p, cfg.q, cfg.k)
            samples = sample_multilevel_jacobi_eigs(cfg.k, cfg.p, cfg.q, rng, size=cfg.draws)
        names = coordinate_names(shape)
        summary["interlacing_violations"] = int(interlacing_violations(shape, samples).sum())

    summary["coordinates"] = _moment_table(samples, names)
    if "csv" in cfg.formats:
        write_samples_csv(_out(cfg, ".csv"), samples, names)
    _write_histogram(cfg, "sum", samples.sum(axis=1))
    _write_ecdfs(cfg, "draws", {name: ecdf(samples[:, j]) for j, name in enumerate(names)})
    _write_summary(cfg, summary)
    printed = {k: v for k, v in summary.items() if k != "coordinates"}
    print(summary_lines(f"oracle {cfg.target}", printed))
    return 0


def _run_sample(cfg: ExperimentConfig) -> int:
    if cfg.model == "laguerre":
        shape: PatternShape = LaguerreShape(cfg.m, cfg.p)
    elif cfg.model == "jacobi":
        shape = JacobiShape(cfg.p, cfg.q, cfg.k)
    else:
        raise ParameterError(f"Gibbs sampling needs model laguerre or jacobi, got {cfg.model!r}")
    samples = sample_gibbs_pattern(shape, cfg.top, RngStream(cfg.seed), size=cfg.draws)
    names = coordinate_names(shape)
    summary = {
        "draws": cfg.draws,
        "interlacing_violations": int(interlacing_violations(shape, samples).sum()),
        "coordinates": _moment_table(samples, names),
    }
    if "csv" in cfg.formats:
        write_samples_csv(_out(cfg, ".csv"), samples, names)
    _write_summary(cfg, summary)
    print(
        summary_lines(
            f"sample gibbs ({cfg.model})",
            {"draws": cfg.draws, "violations": summary["interlacing_violations"]},
        )
    )
    return 0


def _run_check(cfg: ExperimentConfig) -> int:
    if cfg.target == "identities":
        reports = run_identity_suite(cfg.suite, cfg.points, cfg.seed, cfg.max_n)
    else:
        check = check_da_integral if cfg.target == "da-integral" else check_kernel_normalization
        est = check(cfg.n, cfg.p, cfg.y, cfg.mc, RngStream(cfg.seed))
        reports = [mc_report(f"{cfg.target}[n={cfg.n},p={cfg.p}]", est, {"y": cfg.y})]

    passed = all(r.passed for r in reports)
    if "csv" in cfg.formats:
        write_csv(
            _out(cfg, ".csv"),
            ["identity_id", "n_points", "max_residual", "tolerance", "passed"],
            (
                [r.identity_id, r.n_points, r.max_residual, r.tolerance, int(r.passed)]
                for r in reports
            ),
        )
    _write_summary(cfg, {"passed": passed, "reports": [r.to_dict() for r in reports]})
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.identity_id:<48} {r.max_residual:.3e}  (tol {r.tolerance:.1e})")
    print(f"\n{sum(r.passed for r in reports)}/{len(reports)} identities passed")
    if cfg.target != "identities":
        logger.info(f"Monte Carlo tolerance is {MC_SIGMAS:g} standard errors")
    return 0 if passed else 1


def _run_rbm(cfg: ExperimentConfig) -> int:
    tags = RBM_TYPES if cfg.rbm_type == "all" else (cfg.rbm_type,)
    if cfg.target == "simulate":
        if len(tags) != 1:
            raise ParameterError("rbm simulate needs a single --rbm-type")
        spec = builtin_spec(tags[0])
        paths = simulate_gap_process(
            spec, cfg.start, cfg.dt, cfg.horizon, RngStream(cfg.seed), n_paths=cfg.paths
        )
        keep = np.unique(
            np.append(np.arange(0, paths.times.size, cfg.record_stride), paths.times.size - 1)
        )
        if "csv" in cfg.formats:
            write_csv(
                _out(cfg, ".csv"),
                ["path", "time", "z1", "z2", "l1", "l2"],
                (
                    [b, float(paths.times[r])]
                    + [float(v) for v in paths.z[b, r]]
                    + [float(v) for v in paths.pushing[b, r]]
                    for b in range(cfg.paths)
                    for r in keep
                ),
            )
        closest = np.min(np.max(paths.z, axis=-1), axis=-1)
        summary = {
            "type": spec.tag,
            "covariance": spec.covariance,
            "reflection": spec.reflection,
            "final_gap_means": paths.z[:, -1].mean(axis=0),
            "final_pushing_means": paths.pushing[:, -1].mean(axis=0),
            "min_corner_distance": float(closest.min()),
        }
        _write_summary(cfg, summary)
        print(summary_lines(f"rbm simulate {spec.tag}", summary))
        return 0

    results: Dict[str, Any] = {}
    rows: List[List[Any]] = []
    root = RngStream(cfg.seed)
    for index, tag in enumerate(tags):
        spec = builtin_spec(tag)
        ladder = corner_ladder(
            spec, cfg.eps, cfg.paths, root.child(index), cfg.start, cfg.dt, cfg.horizon
        )
        results[tag] = {str(e): s._asdict() for e, s in ladder.items()}
        for s in ladder.values():
            rows.append([tag, s.eps, s.fraction, s.stderr, s.n_paths])
            print(f"{tag:<3} eps={s.eps:<8g} fraction={s.fraction:.4f} +- {s.stderr:.4f}")
    if "csv" in cfg.formats:
        write_csv(_out(cfg, ".csv"), ["type", "eps", "fraction", "stderr", "n_paths"], rows)
    _write_summary(cfg, {"corner_stats": results})
    return 0


def _run_compare(cfg: ExperimentConfig) -> int:
    sim = cfg.sim_config()
    oracle_rng = RngStream(cfg.seed, ORACLE_STREAM)
    if cfg.model == "laguerre":
        if not 1 <= cfg.n <= cfg.m:
            raise ParameterError(f"level n={cfg.n} outside 1..m={cfg.m}")
        ensemble = simulate_warren("laguerre", {"m": cfg.m, "p": cfg.p}, INIT_FROM_ORACLE, sim)
        simulated = ensemble.level(cfg.n)
        oracle = sample_wishart_eigs(cfg.n, cfg.p, cfg.t1, oracle_rng, size=cfg.paths)
    elif cfg.model == "jacobi":
        if not 1 <= cfg.n <= cfg.k:
            raise ParameterError(f"level n={cfg.n} outside 1..k={cfg.k}")
        ensemble = simulate_warren(
            "jacobi", {"p": cfg.p, "q": cfg.q, "k": cfg.k}, INIT_FROM_ORACLE, sim
        )
        simulated = ensemble.level(cfg.n)
        oracle = sample_jacobi_eigs(cfg.n, cfg.p, cfg.q, oracle_rng, size=cfg.paths)
    else:
        ensemble = simulate_left_edge(cfg.p, sim)
        simulated = ensemble.level(cfg.p)
        oracle = sample_wishart_eigs(cfg.p, cfg.p, cfg.t1, oracle_rng, size=cfg.paths)[:, :1]
    if simulated.shape[0] == 0:
        raise PropagationError("every path aborted; nothing to compare")

    reports = compare_coordinates(EmpiricalSample(simulated), EmpiricalSample(oracle))
    trace = ks_two_sample(simulated.sum(axis=1), oracle.sum(axis=1))
    for r in reports:
        j = r.coordinate if r.coordinate is not None else 0
        _write_ecdfs(
            cfg,
            f"coord{j + 1}",
            {"simulated": ecdf(simulated[:, j]), "oracle": ecdf(oracle[:, j])},
        )
    summary = {
        "model": cfg.model,
        "failed_paths": int(ensemble.failed.sum()),
        "ks": [asdict(r) for r in reports],
        "ks_trace": asdict(trace),
    }
    _write_summary(cfg, summary)
    for r in reports:
        print(f"coordinate {r.coordinate}: KS = {r.statistic:.4f} (n={r.n_a}, m={r.n_b})")
    print(f"trace: KS = {trace.statistic:.4f}")
    return 0


HANDLERS: Dict[str, Callable[[ExperimentConfig], int]] = {
    "simulate": _run_simulate,
    "oracle": _run_oracle,
    "sample": _run_sample,
    "check": _run_check,
    "rbm": _run_rbm,
    "compare": _run_compare,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(error_record(exc), file=sys.stderr)
        return 2
    except SystemExit as exc:
        # --help
        return exc.code if isinstance(exc.code, int) else 2

    try:
        cfg = resolve_config(args)
        level = getattr(logging, cfg.log_level)
        logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s")
        logging.getLogger().setLevel(level)
        Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
        return HANDLERS[cfg.command](cfg)
    except (WarrenError, ValueError, OSError) as exc:
        logger.debug("run failed", exc_info=True)
        print(error_record(exc), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
