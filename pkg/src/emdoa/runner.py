"""Experiment configuration, the solver driver, Monte Carlo runs and figure data.

Angles in configs, results and output files are in degrees; powers and the
noise variance are given in dB.  Everything is converted to radians/linear
scale before reaching the solvers.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .em import (EmDetState, EmStoState, check_alpha, em_det_iteration,
                 em_sto_iteration, uniform_alpha)
from .geometry import ArrayGeometry
from .likelihood import DetParams, StoParams, loglik_det, loglik_sto
from .mem import MemDetState, MemStoState, mem_det_iteration, mem_sto_iteration
from .sage import SageDetState, SageStoState, sage_iteration
from .search import LineSearchParams
from .signals import (db_to_linear, draw_signals, gen_deterministic,
                      gen_stochastic, rng_stream, sample_covariance)

log = logging.getLogger(__name__)

ALGORITHMS = ("em", "mem", "sage")
MODELS = {"deterministic": "det", "det": "det", "stochastic": "sto", "sto": "sto"}
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model: str = "deterministic"
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    # signal models the solvers assume; defaults to the data model
    solver_models: list | None = None
    n_sensors: int = 10
    geometry: dict | None = None
    elevation_deg: float = 90.0
    doa_deg: list = field(default_factory=lambda: [20.0, 80.0])
    powers_db: list = field(default_factory=lambda: [-2.0, 4.0])
    sigma_db: float = 4.0
    T: int = 20
    init_doa_deg: list = field(default_factory=lambda: [24.0, 84.0])
    init_signal: float = 1.0
    init_powers: list | float = 1.0
    init_sigma: float = 1.0
    init_sigmas: list | None = None
    alpha: list | None = None
    epsilon_deg: float = 1e-3
    max_iterations: int = 2000
    realizations: int = 1
    master_seed: int = 0
    wanted_tol_deg: float = 5.0
    search: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.algorithms, str):
            self.algorithms = [self.algorithms]
        try:
            self.validate()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown signal model {self.model!r}")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}")
        for mod in self.solver_models or []:
            if mod not in MODELS:
                raise ConfigError(f"unknown solver model {mod!r}")
        M = len(self.doa_deg)
        if M < 1 or len(self.powers_db) != M or len(self.init_doa_deg) != M:
            raise ConfigError("doa_deg, powers_db and init_doa_deg must have equal length")
        if not self.epsilon_deg > 0:
            raise ConfigError("epsilon_deg must be positive")
        if self.T < 1 or self.max_iterations < 1 or self.realizations < 1:
            raise ConfigError("T, max_iterations and realizations must be positive")
        if not self.wanted_tol_deg > 0:
            raise ConfigError("wanted_tol_deg must be positive")
        if not self.init_sigma > 0:
            raise ConfigError("init_sigma must be positive")
        if any(not 0 < a < 180 for a in self.init_doa_deg):
            raise ConfigError("initial azimuths must lie strictly inside (0, 180) degrees")
        check_alpha(self.alpha_vector, M)
        LineSearchParams(**self.search)
        self.array()

    @property
    def n_sources(self) -> int:
        return len(self.doa_deg)

    @property
    def solvers(self) -> list[str]:
        models = [MODELS[m] for m in (self.solver_models or [self.model])]
        return [f"{alg}-{mod}" for mod in models for alg in self.algorithms]

    @property
    def alpha_vector(self) -> np.ndarray:
        if self.alpha is None:
            return uniform_alpha(self.n_sources)
        return np.asarray(self.alpha, dtype=float)

    @property
    def search_params(self) -> LineSearchParams:
        return LineSearchParams(**self.search)

    @property
    def elevation(self) -> float:
        return float(np.deg2rad(self.elevation_deg))

    def array(self) -> ArrayGeometry:
        if self.geometry is not None:
            return ArrayGeometry.from_dict(self.geometry)
        return ArrayGeometry.ula(self.n_sensors)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        if "algorithm" in doc:
            doc["algorithms"] = doc.pop("algorithm")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class RealizationResult:
    solver: str
    azimuths_deg: list
    iterations: int
    loglik_trace: list
    theta_trace: list          # degrees, one entry per iteration including k = 0
    sigma_trace: list
    capped: bool = False
    aborted: bool = False
    diagnostic: str = ""
    sigma_violations: int = 0
    capped_searches: int = 0
    fallbacks: int = 0
    wanted: bool | None = None


def classify_wanted(estimates_deg, truth_deg, tol_deg: float = 5.0) -> bool:
    """True when some source-to-estimate assignment puts every azimuth within tol."""
    est = np.asarray(estimates_deg, dtype=float)
    truth = np.asarray(truth_deg, dtype=float)
    if est.shape != truth.shape:
        raise ValueError("estimates and truth must have the same length")
    if not np.all(np.isfinite(est)):
        return False
    for perm in itertools.permutations(range(est.size)):
        if np.all(np.abs(est[list(perm)] - truth) <= tol_deg):
            return True
    return False


def simulate(config: ExperimentConfig, index: int = 0) -> np.ndarray:
    """Snapshot matrix for realization ``index`` of the configuration."""
    geom = config.array()
    rng = rng_stream(config.master_seed, index)
    doa = np.deg2rad(config.doa_deg)
    powers = db_to_linear(config.powers_db)
    sigma = float(db_to_linear(config.sigma_db))
    if MODELS[config.model] == "sto":
        return gen_stochastic(geom, doa, powers, sigma, config.T, rng, config.elevation)
    S = draw_signals(rng, powers, config.T)
    return gen_deterministic(geom, doa, S, sigma, rng, config.elevation)


def _initial_state(config: ExperimentConfig, solver: str, T: int):
    alg, mod = solver.split("-")
    M = config.n_sources
    az0 = np.deg2rad(np.asarray(config.init_doa_deg, dtype=float))
    sigmas0 = (np.asarray(config.init_sigmas, dtype=float) if config.init_sigmas is not None
               else config.alpha_vector * config.init_sigma)
    if mod == "det":
        S0 = np.full((M, T), complex(config.init_signal))
        if alg == "em":
            return EmDetState(az0, S0, float(config.init_sigma))
        if alg == "mem":
            return MemDetState(az0, S0, sigmas0)
        return SageDetState(az0, S0, float(config.init_sigma))
    P0 = np.broadcast_to(np.asarray(config.init_powers, dtype=float), (M,)).copy()
    if alg == "em":
        return EmStoState(az0, P0, float(config.init_sigma))
    if alg == "mem":
        return MemStoState(az0, P0, sigmas0)
    return SageStoState(az0, P0, float(config.init_sigma))


def _stepper(config: ExperimentConfig, solver: str, geom, Y, Ry):
    alg, mod = solver.split("-")
    search, elev, alpha = config.search_params, config.elevation, config.alpha_vector
    data = Y if mod == "det" else Ry
    if alg == "em":
        it = em_det_iteration if mod == "det" else em_sto_iteration
        return lambda s: it(data, s, alpha, geom, search, elev)
    if alg == "mem":
        it = mem_det_iteration if mod == "det" else mem_sto_iteration
        return lambda s: it(data, s, geom, search, elev)
    return lambda s: sage_iteration(data, s, geom, search, elev)


def _loglik(state, geom, Y, Ry, elevation) -> float:
    if hasattr(state, "signals"):
        return loglik_det(Y, DetParams(state.azimuths, state.signals, state.sigma), geom, elevation)
    return loglik_sto(Ry, StoParams(state.azimuths, state.powers, state.sigma), geom,
                      Y.shape[1], elevation)


def _noise_ok(state) -> bool:
    if isinstance(state, (MemDetState, MemStoState)):
        return bool(np.all(state.sigmas > 0))
    if isinstance(state, SageDetState):
        # noiseless fixed points are legitimate for the deterministic SAGE
        return state.sigma >= 0
    if isinstance(state, SageStoState):
        # every sub-step of the latest sweep, i.e. after any fallback
        return all(r["sigma"] > 0 for r in state.substep_trace[-state.azimuths.size:])
    return state.sigma > 0


def run_solver(config: ExperimentConfig, samples, solver: str | None = None) -> RealizationResult:
    """Iterate one solver until the DOA update is within epsilon degrees.

    ``solver`` is one of ``em-det``, ``mem-det``, ``sage-det``, ``em-sto``,
    ``mem-sto``, ``sage-sto``; it defaults to the first configured one.
    Numerical failures abort this realization only and are reported in the
    result.
    """
    solver = solver or config.solvers[0]
    geom = config.array()
    Y = np.atleast_2d(np.asarray(samples, dtype=complex))
    if Y.shape[0] != geom.n_sensors:
        raise ValueError(f"samples have {Y.shape[0]} rows, array has {geom.n_sensors} sensors")
    if not np.all(np.isfinite(Y)):
        raise ValueError("samples must be finite")
    Ry = sample_covariance(Y)
    state = _initial_state(config, solver, Y.shape[1])
    step = _stepper(config, solver, geom, Y, Ry)

    result = RealizationResult(solver, [], 0, [], [], [])
    result.theta_trace.append(np.rad2deg(state.azimuths).tolist())
    result.sigma_trace.append(state.sigma)
    converged = False
    try:
        result.loglik_trace.append(_loglik(state, geom, Y, Ry, config.elevation))
        for _ in range(config.max_iterations):
            prev = state.azimuths
            state = step(state)
            if not (np.all(np.isfinite(state.azimuths)) and np.isfinite(state.sigma)):
                raise FloatingPointError(f"non-finite iterate at k={state.iteration}")
            if not _noise_ok(state):
                result.sigma_violations += 1
            result.loglik_trace.append(_loglik(state, geom, Y, Ry, config.elevation))
            result.theta_trace.append(np.rad2deg(state.azimuths).tolist())
            result.sigma_trace.append(state.sigma)
            if np.linalg.norm(np.rad2deg(state.azimuths - prev)) <= config.epsilon_deg:
                converged = True
                break
    except (FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
        result.aborted = True
        result.diagnostic = f"{type(exc).__name__}: {exc}"
        log.warning("%s aborted: %s", solver, result.diagnostic)

    result.iterations = state.iteration
    result.capped = not converged and not result.aborted
    result.azimuths_deg = np.rad2deg(state.azimuths).tolist()
    result.capped_searches = state.capped_searches
    result.fallbacks = getattr(state, "fallbacks", 0)
    result.wanted = classify_wanted(result.azimuths_deg, config.doa_deg, config.wanted_tol_deg)
    return result


def samples_checksum(Y) -> str:
    return hashlib.sha256(np.ascontiguousarray(Y, dtype=complex).tobytes()).hexdigest()


def _run_realization(args):
    config, index = args
    Y = simulate(config, index)
    digest = samples_checksum(Y)
    runs = {}
    for solver in config.solvers:
        # every solver sees the very same samples
        assert samples_checksum(Y) == digest
        runs[solver] = run_solver(config, Y, solver)
    return index, digest, runs


@dataclass
class MonteCarloResult:
    config: ExperimentConfig
    checksums: list
    runs: list                 # runs[r][solver] -> RealizationResult
    summary: dict


def summarize(runs: list, solvers: list) -> dict:
    out = {}
    for solver in solvers:
        rs = [r[solver] for r in runs]
        iters = [r.iterations for r in rs if not r.capped and not r.aborted]
        out[solver] = {
            "realizations": len(rs),
            "wanted": sum(bool(r.wanted) for r in rs),
            "capped": sum(r.capped for r in rs),
            "aborted": sum(r.aborted for r in rs),
            "sigma_violations": sum(r.sigma_violations for r in rs),
            "mean_iterations": float(np.mean(iters)) if iters else None,
            "median_iterations": float(np.median(iters)) if iters else None,
            "max_iterations": int(max(iters)) if iters else 0,
        }
    return out


def monte_carlo(config: ExperimentConfig) -> MonteCarloResult:
    """Run every configured solver on the same samples, realization by realization."""
    jobs = [(config, r) for r in range(config.realizations)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            out = list(pool.map(_run_realization, jobs))
    else:
        out = [_run_realization(j) for j in jobs]
    out.sort(key=lambda item: item[0])
    checksums = [digest for _, digest, _ in out]
    runs = [r for _, _, r in out]
    return MonteCarloResult(config, checksums, runs, summarize(runs, config.solvers))


# --- figure recipes -------------------------------------------------------------

_DET_INIT = {"init_signal": 1.0, "init_sigmas": [0.5, 0.5], "init_sigma": 1.0}
_STO_INIT = {"init_powers": 1.0, "init_sigmas": [0.5, 0.5], "init_sigma": 1.0}

FIGURES = {
    "fig1": dict(model="deterministic", doa_deg=[20.0, 80.0], powers_db=[-2.0, 4.0],
                 init_doa_deg=[24.0, 84.0], realizations=1, **_DET_INIT),
    "fig2": dict(model="deterministic", doa_deg=[25.0, 75.0], powers_db=[-4.0, 2.0],
                 init_doa_deg=[40.0, 60.0], realizations=200, **_DET_INIT),
    "fig3": dict(model="deterministic", doa_deg=[70.0, 78.0], powers_db=[-2.0, 4.0],
                 init_doa_deg=[50.0, 58.0], realizations=200, **_DET_INIT),
    "fig4": dict(model="stochastic", doa_deg=[20.0, 80.0], powers_db=[-4.0, 4.0],
                 init_doa_deg=[24.0, 84.0], realizations=1, **_STO_INIT),
    "fig5": dict(model="stochastic", doa_deg=[25.0, 75.0], powers_db=[-4.0, 2.0],
                 init_doa_deg=[40.0, 60.0], realizations=200, **_STO_INIT),
    "fig6": dict(model="stochastic", doa_deg=[70.0, 78.0], powers_db=[-2.0, -1.0],
                 init_doa_deg=[55.0, 63.0], realizations=200, **_STO_INIT),
    "fig7": dict(model="stochastic", solver_models=["deterministic", "stochastic"],
                 algorithms=["em", "sage"], doa_deg=[50.0, 100.0], powers_db=[-4.0, 4.0],
                 init_doa_deg=[55.0, 95.0], realizations=50, init_signal=1.0,
                 init_powers=1.0, init_sigma=1.0),
}
FIGURES["fig8"] = dict(FIGURES["fig7"])

COLUMNS = {
    "trace": ["k", "algorithm", "loglik", "phi1_deg", "phi2_deg"],
    "scatter": ["realization", "algorithm", "model", "phi1_hat", "phi2_hat", "iterations", "wanted"],
    "fig7": ["realization", "algorithm", "model", "phi1_hat", "phi2_hat"],
    "fig8": ["realization", "em_det_iters", "em_sto_iters", "sage_det_iters", "sage_sto_iters"],
}


def figure_config(name: str, **overrides) -> ExperimentConfig:
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; expected one of {sorted(FIGURES)}")
    doc = dict(FIGURES[name])
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(doc)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _figure_rows(name: str, mc: MonteCarloResult):
    solvers = mc.config.solvers
    if name in ("fig1", "fig4"):
        rows = []
        for solver in solvers:
            res = mc.runs[0][solver]
            for k, (L, th) in enumerate(zip(res.loglik_trace, res.theta_trace)):
                rows.append([k, solver.split("-")[0], L, th[0], th[1]])
        return COLUMNS["trace"], rows
    if name == "fig7":
        rows = [[r, s.split("-")[0], s.split("-")[1], run[s].azimuths_deg[0], run[s].azimuths_deg[1]]
                for s in solvers for r, run in enumerate(mc.runs)]
        return COLUMNS["fig7"], rows
    if name == "fig8":
        order = ["em-det", "em-sto", "sage-det", "sage-sto"]
        rows = [[r] + [run[s].iterations for s in order] for r, run in enumerate(mc.runs)]
        return COLUMNS["fig8"], rows
    rows = [[r, s.split("-")[0], s.split("-")[1], run[s].azimuths_deg[0],
             run[s].azimuths_deg[1], run[s].iterations, bool(run[s].wanted)]
            for s in solvers for r, run in enumerate(mc.runs)]
    return COLUMNS["scatter"], rows


def _write_sidecar(path: Path, label: str, columns, mc: MonteCarloResult):
    doc = {"figure": label, "schema_version": SCHEMA_VERSION, "columns": columns,
           "config": mc.config.to_dict(), "summary": mc.summary,
           "sample_checksums": mc.checksums}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def save_monte_carlo(mc: MonteCarloResult, outdir, stem: str = "montecarlo") -> dict:
    """Write per-realization estimates (scatter schema) and the JSON sidecar."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    columns, rows = _figure_rows("", mc)
    csv_path, json_path = outdir / f"{stem}.csv", outdir / f"{stem}.json"
    _write_csv(csv_path, columns, rows)
    _write_sidecar(json_path, None, columns, mc)
    return {"csv": csv_path, "json": json_path}


def reproduce_figure(name: str, outdir, **overrides) -> dict:
    """Run a figure's experiment and write ``<name>.csv`` plus a ``<name>.json`` sidecar.

    Returns a dict with the written paths, the Monte Carlo summary and the
    result object itself.
    """
    config = figure_config(name, **overrides)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    mc = monte_carlo(config)
    columns, rows = _figure_rows(name, mc)
    csv_path, json_path = outdir / f"{name}.csv", outdir / f"{name}.json"
    _write_csv(csv_path, columns, rows)
    _write_sidecar(json_path, name, columns, mc)
    return {"csv": csv_path, "json": json_path, "summary": mc.summary, "result": mc}
