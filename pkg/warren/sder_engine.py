"""
Discretized reflected SDE integrators for the Warren processes, the left-edge
projection and the single-level eigenvalue SDEs.

Every integrator works on a batch of paths at once. Within a step levels are
updated bottom-up: each particle takes a full-truncation Euler step and is then
clamped into the band formed by its already-updated partners on the level
below (and by the global bounds 0 and, for Jacobi, 1). Clamp displacements are
accumulated in the lower/upper ledgers as proxies for half the local times.

Ensembles are generated in chunks of paths; chunk c draws all of its
randomness from ``RngStream(seed, c)`` so results do not depend on how many
workers run the chunks.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from .errors import (
    DegenerateBandError,
    DomainError,
    ParameterError,
    PropagationError,
    ShapeError,
    StiffStepError,
    ValidationError,
)
from .gt_core import (
    GTPattern,
    JacobiShape,
    LaguerreShape,
    LeftEdgeShape,
    PatternShape,
    SpectrumShape,
    describe_violations,
    interlacing_violations,
)
from .oracles import (
    RngLike,
    RngStream,
    as_generator,
    sample_jacobi_eigs,
    sample_multilevel_jacobi_eigs,
    sample_multilevel_wishart_eigs,
    sample_wishart_eigs,
)

logger = logging.getLogger(__name__)

SCHEMES = ("full-truncation-euler",)
INIT_FROM_ORACLE = "gibbs-from-oracle"
COLLAPSE_TOL = 1e-12
SEP_MIN = 1e-10
MAX_HALVINGS = 20

Array = np.ndarray


@dataclass(frozen=True)
class SimConfig:
    """Everything that determines a reproducible run."""

    dt: float = 1e-3
    t0: float = 0.0
    t1: float = 1.0
    n_paths: int = 1000
    seed: int = 0
    scheme: str = "full-truncation-euler"
    record_stride: int = 100
    chunk_size: int = 2048
    workers: int = 1
    progress: bool = False

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.t0 < 0 or self.t1 < self.t0:
            raise ParameterError(f"need t1 >= t0 >= 0, got t0={self.t0}, t1={self.t1}")
        if self.t1 > self.t0 and self.dt > self.t1 - self.t0 + 1e-12:
            raise ParameterError(
                f"dt={self.dt} exceeds the time window {self.t1 - self.t0}"
            )
        if self.n_paths < 1:
            raise ParameterError(f"n_paths must be positive, got {self.n_paths}")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.record_stride < 1:
            raise ParameterError(f"record_stride must be positive, got {self.record_stride}")
        if self.chunk_size < 1 or self.workers < 1:
            raise ParameterError("chunk_size and workers must be positive")
        RngStream(self.seed)

    def step_sizes(self) -> Array:
        """Time steps covering [t0, t1]; the last one is shortened if needed."""
        span = self.t1 - self.t0
        if span <= 0:
            return np.zeros(0)
        full = int(math.floor(span / self.dt + 1e-9))
        steps = [self.dt] * full
        rest = span - full * self.dt
        if rest > 1e-12 * max(1.0, span):
            steps.append(rest)
        return np.array(steps)

    def record_steps(self) -> Array:
        """Indices (in steps taken) at which the state is recorded."""
        n_steps = len(self.step_sizes())
        marks = set(range(0, n_steps + 1, self.record_stride))
        marks.add(n_steps)
        return np.array(sorted(marks), dtype=int)

    def time_grid(self) -> Array:
        times = self.t0 + np.concatenate([[0.0], np.cumsum(self.step_sizes())])
        return times[self.record_steps()]


@dataclass
class PathState:
    """
    State of a batch of paths at one time.

    ``positions`` holds flat pattern coordinates (paths, n_coords); ledgers have
    the same layout and collect clamp displacements against the lower and
    upper boundary of each particle.
    """

    shape: PatternShape
    time: float
    positions: Array
    lower_ledger: Array
    upper_ledger: Array
    failed: Array

    @classmethod
    def start(cls, shape: PatternShape, positions: Array, time: float = 0.0) -> "PathState":
        positions = np.atleast_2d(np.asarray(positions, dtype=float)).copy()
        if positions.shape[-1] != shape.n_coords:
            raise ShapeError(f"expected {shape.n_coords} coordinates, got {positions.shape[-1]}")
        zeros = np.zeros_like(positions)
        return cls(
            shape, float(time), positions, zeros, zeros.copy(),
            np.zeros(positions.shape[0], dtype=bool),
        )

    @property
    def n_paths(self) -> int:
        return self.positions.shape[0]

    def pattern(self, path: int = 0) -> GTPattern:
        return GTPattern.from_flat(self.shape, self.positions[path])


@dataclass
class PathEnsemble:
    """Recorded trajectories of a batch of paths on one shared time grid."""

    model: str
    shape: PatternShape
    config: SimConfig
    times: Array
    positions: Array
    lower_ledger: Array
    upper_ledger: Array
    failed: Array
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.positions.shape[0]

    @property
    def n_records(self) -> int:
        return self.times.shape[0]

    def level(self, n: int, record: int = -1, include_failed: bool = False) -> Array:
        """Level-n positions (paths, particles) at one recorded time."""
        values = self.positions[:, record, self.shape.level_slice(n)]
        return values if include_failed else values[~self.failed]

    def pattern(self, path: int, record: int = -1) -> GTPattern:
        return GTPattern.from_flat(self.shape, self.positions[path, record])

    def state(self, path: int, record: int = -1) -> PathState:
        sl = slice(path, path + 1)
        return PathState(
            self.shape,
            float(self.times[record]),
            self.positions[sl, record].copy(),
            self.lower_ledger[sl, record].copy(),
            self.upper_ledger[sl, record].copy(),
            self.failed[sl].copy(),
        )

    def violation_count(self, tol: float = 0.0) -> int:
        """Number of (path, record) cells that break the cone."""
        live = self.positions[~self.failed]
        return int(np.sum(interlacing_violations(self.shape, live, tol)))

    def ledger_decreases(self) -> int:
        """Number of ledger entries that decrease between consecutive records."""
        drops = 0
        for ledger in (self.lower_ledger, self.upper_ledger):
            drops += int(np.sum(np.diff(ledger, axis=1) < 0))
            drops += int(np.sum(ledger < 0))
        return drops


# ---------------------------------------------------------------------
# Reflection
# ---------------------------------------------------------------------


def reflect_two_boundary(x: float, lower: float, upper: float) -> Tuple[float, float, float]:
    """
    Project ``x`` into [lower, upper].

    Returns:
        (x', dPhi, dPsi) with dPhi = max(lower - x, 0), dPsi = max(x - upper, 0)

    Raises:
        DegenerateBandError: if lower exceeds upper by more than 1e-12
    """
    if lower > upper:
        if lower - upper > COLLAPSE_TOL:
            raise DegenerateBandError(f"band [{lower}, {upper}] is empty")
        lower = upper = 0.5 * (lower + upper)
    d_phi = max(lower - x, 0.0)
    d_psi = max(x - upper, 0.0)
    return min(max(x, lower), upper), d_phi, d_psi


def reflect_band(x: Array, lower: Array, upper: Array) -> Tuple[Array, Array, Array, Array]:
    """Vectorized reflect_two_boundary; the last output flags broken bands."""
    gap = lower - upper
    broken = gap > COLLAPSE_TOL
    collapse = (gap > 0) & ~broken
    if collapse.any():
        mid = 0.5 * (lower + upper)
        lower = np.where(collapse, mid, lower)
        upper = np.where(collapse, mid, upper)
    d_phi = np.maximum(lower - x, 0.0)
    d_psi = np.maximum(x - upper, 0.0)
    d_psi = np.where(broken, 0.0, d_psi)
    return np.minimum(np.maximum(x, lower), upper), d_phi, d_psi, broken


# ---------------------------------------------------------------------
# Per-level coefficients
# ---------------------------------------------------------------------

Coefficient = Callable[[Array], Array]


def _besq_diffusion(x: Array) -> Array:
    return 2.0 * np.sqrt(np.maximum(x, 0.0))


def _jacobi_diffusion(x: Array) -> Array:
    return 2.0 * np.sqrt(np.maximum(x, 0.0) * np.maximum(1.0 - x, 0.0))


def level_coefficients(shape: PatternShape, n: int) -> Tuple[Coefficient, Coefficient]:
    """Drift and diffusion of a level-n particle between reflections."""
    if isinstance(shape, (LaguerreShape, LeftEdgeShape)):
        dimension = 2.0 * (shape.p - n + 1)
        return (lambda x: np.full_like(x, dimension)), _besq_diffusion
    if isinstance(shape, JacobiShape):
        a = 2.0 * (shape.p - n + 1)
        b = 2.0 * (shape.p + shape.q - 2 * n + 2)
        return (lambda x: a - b * x), _jacobi_diffusion
    raise ShapeError(f"no reflected dynamics for {type(shape).__name__}")


def _partner_indices(shape: PatternShape, n: int) -> Tuple[Array, Array]:
    rows = shape.partner_table[shape.level_slice(n)]
    lower = np.array([-1 if r[1] is None else r[1] for r in rows], dtype=int)
    upper = np.array([-1 if r[2] is None else r[2] for r in rows], dtype=int)
    return lower, upper


def _reflected_step(state: PathState, dt: float, gen: np.random.Generator) -> PathState:
    if dt < 0:
        raise ParameterError(f"dt must be nonnegative, got {dt}")
    shape = state.shape
    live = ~state.failed
    if np.isnan(state.positions[live]).any():
        raise PropagationError(f"NaN in state at t={state.time}")

    old = state.positions
    new = old.copy()
    lower_ledger = state.lower_ledger.copy()
    upper_ledger = state.upper_ledger.copy()
    broken_any = np.zeros(state.n_paths, dtype=bool)
    noise = gen.standard_normal(old.shape)
    sqrt_dt = math.sqrt(dt)

    for n in range(1, shape.n_levels + 1):
        sl = shape.level_slice(n)
        drift, diffusion = level_coefficients(shape, n)
        x = old[:, sl]
        proposal = x + diffusion(x) * sqrt_dt * noise[:, sl] + drift(x) * dt

        lower_idx, upper_idx = _partner_indices(shape, n)
        lo = np.where(lower_idx >= 0, new[:, np.maximum(lower_idx, 0)], 0.0)
        lo = np.maximum(lo, 0.0)
        hi = np.where(upper_idx >= 0, new[:, np.maximum(upper_idx, 0)], shape.upper_cap)
        hi = np.minimum(hi, shape.upper_cap)

        placed, d_phi, d_psi, broken = reflect_band(proposal, lo, hi)
        new[:, sl] = placed
        lower_ledger[:, sl] += d_phi
        upper_ledger[:, sl] += d_psi
        broken_any |= broken.any(axis=1)

    newly_failed = broken_any & live
    if newly_failed.any():
        logger.warning(
            f"{int(newly_failed.sum())} path(s) aborted at t={state.time + dt:.6g}: "
            "reflection band collapsed"
        )
    failed = state.failed | broken_any
    # failed paths stay frozen at their last good state
    new[failed] = old[failed]
    lower_ledger[failed] = state.lower_ledger[failed]
    upper_ledger[failed] = state.upper_ledger[failed]
    return PathState(shape, state.time + dt, new, lower_ledger, upper_ledger, failed)


def step_laguerre(state: PathState, dt: float, rng: RngLike) -> PathState:
    """
    One step of the Laguerre Warren process (or its left-edge projection).

    Level n particles follow dl = 2 sqrt(l) dB + 2(p - n + 1) dt between
    reflections off their partners on level n - 1.
    """
    if not isinstance(state.shape, (LaguerreShape, LeftEdgeShape)):
        raise ShapeError("step_laguerre needs a Laguerre or left-edge state")
    return _reflected_step(state, dt, as_generator(rng))


def step_jacobi(state: PathState, dt: float, rng: RngLike) -> PathState:
    """One step of the Jacobi Warren process, clamped to [0, 1]."""
    if not isinstance(state.shape, JacobiShape):
        raise ShapeError("step_jacobi needs a Jacobi state")
    return _reflected_step(state, dt, as_generator(rng))


# ---------------------------------------------------------------------
# Ensemble driver
# ---------------------------------------------------------------------

ChunkResult = Tuple[Array, Array, Array, Array]
ChunkRunner = Callable[[int, int], ChunkResult]


def _chunks(config: SimConfig) -> List[Tuple[int, int]]:
    out = []
    start = 0
    index = 0
    while start < config.n_paths:
        size = min(config.chunk_size, config.n_paths - start)
        out.append((index, size))
        start += size
        index += 1
    return out


def _run_chunks(config: SimConfig, runner: ChunkRunner, label: str) -> ChunkResult:
    chunks = _chunks(config)
    with tqdm(total=len(chunks), desc=label, disable=not config.progress) as bar:

        def task(chunk: Tuple[int, int]) -> ChunkResult:
            result = runner(*chunk)
            bar.update(1)
            return result

        if config.workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(task, chunks))
        else:
            results = [task(chunk) for chunk in chunks]
    return tuple(np.concatenate(parts, axis=0) for parts in zip(*results))  # type: ignore


def _evolve(
    state: PathState,
    config: SimConfig,
    gen: np.random.Generator,
    step: Callable[[PathState, float, np.random.Generator], PathState],
) -> ChunkResult:
    steps = config.step_sizes()
    marks = config.record_steps()
    n_rec = len(marks)
    paths, coords = state.positions.shape
    positions = np.empty((paths, n_rec, coords))
    lower = np.empty_like(positions)
    upper = np.empty_like(positions)

    def record(slot: int, current: PathState) -> None:
        positions[:, slot] = current.positions
        lower[:, slot] = current.lower_ledger
        upper[:, slot] = current.upper_ledger

    slot = 0
    record(slot, state)
    slot += 1
    for k, dt in enumerate(steps, start=1):
        state = step(state, float(dt), gen)
        if slot < n_rec and marks[slot] == k:
            record(slot, state)
            slot += 1
    return positions, lower, upper, state.failed.copy()


def _initial_positions(
    shape: PatternShape,
    init: Union[str, GTPattern, Sequence[float]],
    config: SimConfig,
    gen: np.random.Generator,
    size: int,
) -> Array:
    if isinstance(init, str):
        if init != INIT_FROM_ORACLE:
            raise ValidationError(f"unknown init {init!r}; use {INIT_FROM_ORACLE!r} or a pattern")
        if isinstance(shape, JacobiShape):
            return sample_multilevel_jacobi_eigs(shape.k, shape.p, shape.q, gen, size=size)
        if isinstance(shape, LaguerreShape):
            if config.t0 == 0:
                return np.zeros((size, shape.n_coords))
            return sample_multilevel_wishart_eigs(shape.m, shape.p, config.t0, gen, size=size)
        if isinstance(shape, LeftEdgeShape):
            if config.t0 == 0:
                return np.zeros((size, shape.n_coords))
            full = LaguerreShape(shape.p, shape.p)
            flat = sample_multilevel_wishart_eigs(shape.p, shape.p, config.t0, gen, size=size)
            return flat[:, list(full.offsets[:-1])]
        raise ShapeError(f"no oracle for {type(shape).__name__}")
    pattern = init if isinstance(init, GTPattern) else GTPattern.from_flat(shape, init)
    if pattern.shape != shape:
        raise ValidationError(f"init pattern shape {pattern.shape} does not match {shape}")
    problems = describe_violations(pattern)
    if problems:
        raise ValidationError("invalid init pattern: " + "; ".join(problems))
    return np.tile(pattern.flat(), (size, 1))


def _simulate_reflected(
    model: str,
    shape: PatternShape,
    init: Union[str, GTPattern, Sequence[float]],
    config: SimConfig,
    params: Dict[str, Any],
) -> PathEnsemble:
    stepper = step_jacobi if isinstance(shape, JacobiShape) else step_laguerre

    # validate an explicit init once, before any chunk runs
    if not isinstance(init, str):
        _initial_positions(shape, init, config, np.random.default_rng(0), 1)

    def runner(chunk: int, size: int) -> ChunkResult:
        gen = RngStream(config.seed, chunk).generator()
        start = _initial_positions(shape, init, config, gen, size)
        return _evolve(PathState.start(shape, start, config.t0), config, gen, stepper)

    positions, lower, upper, failed = _run_chunks(config, runner, model)
    if failed.any():
        logger.warning(f"{int(failed.sum())} of {config.n_paths} paths aborted")
    logger.info(
        f"Simulated {config.n_paths} {model} paths on {len(config.step_sizes())} steps"
    )
    return PathEnsemble(
        model, shape, config, config.time_grid(), positions, lower, upper, failed, params
    )


def simulate_warren(
    model: str,
    params: Mapping[str, int],
    init: Union[str, GTPattern, Sequence[float]],
    config: SimConfig,
) -> PathEnsemble:
    """
    Simulate the Laguerre or Jacobi Warren process.

    Args:
        model: "laguerre" (params m, p) or "jacobi" (params p, q, k)
        params: Model parameters
        init: "gibbs-from-oracle" or an explicit pattern
        config: Time grid, path count and seed

    Returns:
        PathEnsemble recorded every ``config.record_stride`` steps
    """
    if model == "laguerre":
        shape: PatternShape = LaguerreShape(int(params["m"]), int(params["p"]))
    elif model == "jacobi":
        shape = JacobiShape(int(params["p"]), int(params["q"]), int(params["k"]))
    else:
        raise ParameterError(f"unknown model {model!r}; use 'laguerre' or 'jacobi'")
    return _simulate_reflected(model, shape, init, config, dict(params))


def simulate_left_edge(
    p: int,
    config: SimConfig,
    init: Union[str, GTPattern, Sequence[float]] = INIT_FROM_ORACLE,
) -> PathEnsemble:
    """
    Smallest particle of levels 1..p of the Laguerre Warren process.

    The chain l^1_1 >= l^2_1 >= ... >= l^p_1 >= 0 is autonomous: each particle
    is a squared Bessel process of dimension 2(p - n + 1) pushed down by the one
    above it.
    """
    return _simulate_reflected("left-edge", LeftEdgeShape(p), init, config, {"p": p})


# ---------------------------------------------------------------------
# Single-level eigenvalue SDEs
# ---------------------------------------------------------------------


def _eigen_coefficients(
    level: str, params: Mapping[str, int]
) -> Tuple[int, float, Coefficient, Coefficient, Coefficient]:
    n = int(params["n"])
    p = int(params["p"])
    if level == "laguerre":
        count = min(n, p)
        base = 2.0 * (abs(n - p) + 1)

        def drift(x: Array) -> Array:
            return np.full_like(x, base)

        return count, math.inf, drift, (lambda x: 4.0 * x), _besq_diffusion
    if level == "jacobi":
        q = int(params["q"])
        if n > min(p, q):
            raise ParameterError(f"n={n} exceeds min(p, q)={min(p, q)}")
        a = 2.0 * (p - n + 1)
        b = 2.0 * (p + q - 2 * n + 2)
        return n, 1.0, (lambda x: a - b * x), (lambda x: 4.0 * x * (1.0 - x)), _jacobi_diffusion
    raise ParameterError(f"unknown level family {level!r}; use 'laguerre' or 'jacobi'")


def _ordered(x: Array, cap: float) -> Array:
    ok = np.all(x >= 0.0, axis=-1) & np.all(x <= cap, axis=-1)
    if x.shape[-1] > 1:
        ok &= np.all(np.diff(x, axis=-1) > 0, axis=-1)
    return ok & np.all(np.isfinite(x), axis=-1)


def step_eigenvalue_sde(
    level: str,
    lam: Array,
    params: Mapping[str, int],
    dt: float,
    rng: RngLike,
) -> Tuple[Array, Array]:
    """
    One Euler step of the Laguerre or Jacobi eigenvalue SDE.

    The drift is the single-particle drift plus sum_{j != i} c(l_i)/(l_i - l_j)
    with c = 4l (Laguerre) or 4l(1 - l) (Jacobi); separations below 1e-10 are
    floored. A path whose step would break the ordering is redone on substeps:
    the failing substep is replaced by two halves whose Brownian increments are
    a bridge split of its own. Each path gets 20 such splits per step in total.

    Args:
        level: "laguerre" (params n, p) or "jacobi" (params n, p, q)
        lam: Ascending eigenvalues, (count,) or (paths, count)
        params: Level parameters
        dt: Step size
        rng: Randomness source (pass a Generator when stepping repeatedly)

    Returns:
        (new eigenvalues, stiff mask); stiff paths keep their input values

    Raises:
        StiffStepError: for single-path input whose halving budget runs out
    """
    count, cap, drift, interaction, diffusion = _eigen_coefficients(level, params)
    single = np.ndim(lam) == 1
    x = np.atleast_2d(np.asarray(lam, dtype=float))
    if x.shape[-1] != count:
        raise ShapeError(f"expected {count} eigenvalues, got {x.shape[-1]}")
    if np.isnan(x).any():
        raise PropagationError("NaN in eigenvalue state")
    if dt < 0:
        raise ParameterError(f"dt must be nonnegative, got {dt}")
    gen = as_generator(rng)

    def euler(y: Array, dw: Array, h: float) -> Array:
        move = drift(y)
        if count > 1:
            diff = y[:, :, None] - y[:, None, :]
            safe = np.where(diff >= 0, 1.0, -1.0) * np.maximum(np.abs(diff), SEP_MIN)
            diag = np.arange(count)
            safe[:, diag, diag] = np.inf
            move = move + interaction(y) * np.sum(1.0 / safe, axis=-1)
        return y + move * h + diffusion(y) * dw

    def split(h: float, dw: Array) -> List[Tuple[float, Array]]:
        # W(h/2) given W(h) = dw; second half is pushed first so the first runs first
        first = 0.5 * dw + 0.5 * math.sqrt(h) * gen.standard_normal(dw.shape)
        return [(0.5 * h, dw - first), (0.5 * h, first)]

    def refine(y: Array, dw: Array, h: float) -> Tuple[Array, bool]:
        pending = split(h, dw)
        halvings = 1
        current = y
        while pending:
            h_sub, dw_sub = pending.pop()
            proposal = euler(current[None, :], dw_sub[None, :], h_sub)
            if _ordered(proposal, cap)[0]:
                current = proposal[0]
                continue
            if halvings >= MAX_HALVINGS:
                return y, True
            halvings += 1
            pending.extend(split(h_sub, dw_sub))
        return current, False

    dw = math.sqrt(dt) * gen.standard_normal(x.shape)
    new = euler(x, dw, dt)
    stiff = np.zeros(x.shape[0], dtype=bool)
    for path in np.flatnonzero(~_ordered(new, cap)):
        new[path], stiff[path] = refine(x[path], dw[path], dt)
    if single:
        if stiff[0]:
            raise StiffStepError(f"step of size {dt} not accepted after {MAX_HALVINGS} halvings")
        return new[0], stiff
    return new, stiff


def simulate_eigenvalue_sde(
    level: str,
    params: Mapping[str, int],
    config: SimConfig,
    init: Union[str, Sequence[float]] = "oracle",
) -> PathEnsemble:
    """
    Ensemble of eigenvalue-SDE paths.

    ``init="oracle"`` starts from the exact law at t0 (Wishart for Laguerre,
    which needs t0 > 0; the stationary Jacobi law for Jacobi). Stiff paths are
    flagged in ``failed`` and excluded from statistics.
    """
    count, cap, *_ = _eigen_coefficients(level, params)
    shape = SpectrumShape(count, cap)
    n, p = int(params["n"]), int(params["p"])
    if isinstance(init, str):
        if init != "oracle":
            raise ValidationError(f"unknown init {init!r}; use 'oracle' or explicit values")
        if level == "laguerre" and config.t0 <= 0:
            raise ParameterError("eigenvalue SDE from the oracle needs t0 > 0 (distinct start)")
        explicit = None
    else:
        explicit = np.asarray(init, dtype=float)
        if explicit.shape != (count,) or not _ordered(explicit[None, :], cap)[0]:
            raise ValidationError(f"init must be {count} strictly ascending values in [0, {cap}]")

    def stepper(state: PathState, dt: float, gen: np.random.Generator) -> PathState:
        live = ~state.failed
        positions = state.positions.copy()
        failed = state.failed.copy()
        if live.any():
            moved, stiff = step_eigenvalue_sde(level, positions[live], params, dt, gen)
            positions[live] = moved
            failed[np.flatnonzero(live)[stiff]] = True
        return replace(state, time=state.time + dt, positions=positions, failed=failed)

    def runner(chunk: int, size: int) -> ChunkResult:
        gen = RngStream(config.seed, chunk).generator()
        if explicit is not None:
            start = np.tile(explicit, (size, 1))
        elif level == "laguerre":
            start = sample_wishart_eigs(n, p, config.t0, gen, size=size)
        else:
            start = sample_jacobi_eigs(n, p, int(params["q"]), gen, size=size)
        return _evolve(PathState.start(shape, start, config.t0), config, gen, stepper)

    positions, lower, upper, failed = _run_chunks(config, runner, f"eigen-{level}")
    if failed.any():
        logger.warning(f"{int(failed.sum())} stiff path(s) discarded from statistics")
    return PathEnsemble(
        f"eigen-{level}", shape, config, config.time_grid(), positions, lower, upper,
        failed, dict(params),
    )


# ---------------------------------------------------------------------
# Lamperti transform of the Jacobi particles
# ---------------------------------------------------------------------


def _check_open_unit(x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x >= 1):
        raise DomainError("Lamperti transform needs 0 < x < 1")
    return x


def lamperti_transform(x: Array) -> Array:
    """f(x) = arcsin(sqrt(x)), which turns 2 sqrt(x(1-x)) dB into dB."""
    return np.arcsin(np.sqrt(_check_open_unit(x)))


def lamperti_derivatives(x: Array) -> Tuple[Array, Array]:
    """(f'(x), f''(x)) of the Lamperti transform."""
    x = _check_open_unit(x)
    root = np.sqrt(x * (1.0 - x))
    return 1.0 / (2.0 * root), -(1.0 - 2.0 * x) / (4.0 * root**3)


def lamperti_drift(x: Array, l: int, p: int, q: int) -> Array:
    """
    Drift of f(j) for a level-l Jacobi particle j, where f is the Lamperti map.

    g_l = f'' phi^2 / 2 + f' h_l with phi(u) = 2 sqrt(u(1-u)) and
    h_l(u) = 2((p - l + 1) - (p + q - 2l + 2) u).
    """
    x = _check_open_unit(x)
    first, second = lamperti_derivatives(x)
    h = 2.0 * ((p - l + 1) - (p + q - 2 * l + 2) * x)
    phi_sq = 4.0 * x * (1.0 - x)
    return 0.5 * second * phi_sq + first * h
