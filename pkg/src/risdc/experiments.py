"""Monte Carlo sweep orchestration, config ingestion, and result persistence.

The single-user sweep pairs every configured method against the same channel
realization per trial; the multi-user sweep draws independent per-UE links and
scores the perfect / weighted-combination / unexpected / mirror cases.  Every
output byte is a pure function of (config, master_seed) regardless of the
worker count.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .channel import ArrayGeometry, ChannelConfig, LinkRealization, draw_link, link_stream, ula, upa
from .errors import ConfigurationError, DomainError
from .evaluation import (
    LinkBudget,
    _rate_for_theta,
    achievable_rate,
    design_precoder,
    effective_channel,
    multiuser_sum_rate,
)
from .matio import load_matrix, matrix_to_obj
from .regulation import RegulationMatrix, mirror_identity, project_full_to_diagonal, random_phase_diag
from .solvers import PAWeights, haar_rotate_channels, pa_combine, svd_decouple, thin_decouple
from .solvers import ao_diagonal_solve
from .evaluation import decoupled_rate_closed_form

SINGLE_USER_METHODS = ("decouple", "decouple_diag_projected", "ao", "random")
MULTI_USER_METHODS = ("perfect", "pa", "unexpected", "mirror")

# Stream ids for method-internal randomness; far above any link id.
_RANDOM_STREAM = 1_000_001
_UNEXPECTED_STREAM = 1_000_002

# Per-UE link-id namespace stride in the multi-user scenario.
_UE_LINK_STRIDE = 8

CSV_HEADER = "method,n_ris,trial,rate_bps_hz,sum_rate_bps_hz,wall_time_s"
SUMMARY_HEADER = "method,n_ris,mean_rate,std_rate,normalized_mean"


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    bs_geometry: ArrayGeometry
    ris_sizes: tuple
    ue_antennas: int
    num_ues: int
    channel: ChannelConfig
    budget: LinkBudget
    methods: tuple
    trials: int
    master_seed: int
    normalization: str = "global_max"
    reference_method: Optional[str] = None
    ao_max_iters: int = 50
    ao_rel_tol: float = 1e-4
    num_streams: int = 1


@dataclass(frozen=True)
class TrialRecord:
    method: str
    n_ris: int
    trial: int
    rates: tuple  # per-UE rates in bit/s/Hz
    sum_rate: float
    wall_time_s: float


@dataclass(frozen=True)
class Aggregate:
    method: str
    n_ris: int
    mean_rate: float
    std_rate: float
    normalized_mean: float


@dataclass(frozen=True)
class SweepResult:
    config: dict
    records: list
    aggregates: list
    ao_histories: dict = field(default_factory=dict)  # (n_ris, trial) -> list[float]


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.scenario not in ("single_user", "multi_user"):
        raise ConfigurationError(f"unknown scenario {cfg.scenario!r}")
    if not cfg.ris_sizes:
        raise ConfigurationError("ris_sizes must be nonempty")
    if not cfg.methods:
        raise ConfigurationError("methods must be nonempty")
    allowed = SINGLE_USER_METHODS if cfg.scenario == "single_user" else MULTI_USER_METHODS
    for m in cfg.methods:
        if m not in allowed:
            raise ConfigurationError(
                f"method {m!r} not valid for scenario {cfg.scenario!r} (allowed: {allowed})"
            )
    if cfg.trials < 1:
        raise ConfigurationError("trials must be >= 1")
    if cfg.master_seed < 0 or cfg.master_seed > 2**64 - 1:
        raise ConfigurationError("master_seed must fit in 64 unsigned bits")
    if cfg.scenario == "single_user" and cfg.num_ues != 1:
        raise ConfigurationError("single_user scenario requires num_ues = 1")
    if cfg.num_ues < 1:
        raise ConfigurationError("num_ues must be >= 1")
    if cfg.ue_antennas < 1:
        raise ConfigurationError("ue_antennas must be >= 1")
    if cfg.normalization not in ("none", "global_max", "reference_method"):
        raise ConfigurationError(f"unknown normalization {cfg.normalization!r}")
    if cfg.normalization == "reference_method":
        if cfg.reference_method not in cfg.methods:
            raise ConfigurationError("reference_method must be one of the configured methods")
    if cfg.num_streams < 1:
        raise ConfigurationError("num_streams must be >= 1")


def default_single_user_config(trials: int = 200, master_seed: int = 42) -> ExperimentConfig:
    """Single-user sweep: BS UPA 8x4, RIS UPA 50 x {2,4,8,16,32}, 28 GHz LoS."""
    return ExperimentConfig(
        scenario="single_user",
        bs_geometry=upa(8, 4),
        ris_sizes=tuple(upa(50, my) for my in (2, 4, 8, 16, 32)),
        ue_antennas=2,
        num_ues=1,
        channel=ChannelConfig(carrier_hz=28e9),
        budget=LinkBudget(),
        methods=("decouple", "ao", "random"),
        trials=trials,
        master_seed=master_seed,
    )


def default_multi_user_config(trials: int = 100, master_seed: int = 42) -> ExperimentConfig:
    """Two-UE sweep: BS ULA 64, RIS ULA {800,1600,3200,6400}, 5 GHz LoS."""
    return ExperimentConfig(
        scenario="multi_user",
        bs_geometry=ula(64),
        ris_sizes=tuple(ula(n) for n in (800, 1600, 3200, 6400)),
        ue_antennas=2,
        num_ues=2,
        channel=ChannelConfig(carrier_hz=5e9),
        budget=LinkBudget(),
        methods=("perfect", "pa", "unexpected", "mirror"),
        trials=trials,
        master_seed=master_seed,
    )


# ---------------------------------------------------------------------------
# Config (de)serialization


def _geometry_from_dict(obj, origin) -> ArrayGeometry:
    try:
        return ArrayGeometry(
            kind=obj["kind"],
            nx=int(obj["nx"]),
            ny=int(obj.get("ny", 1)),
            spacing=float(obj.get("spacing", 0.5)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"{origin}: invalid geometry {obj!r}: {exc}") from exc


def config_from_dict(obj: dict) -> ExperimentConfig:
    known = {
        "scenario", "bs_geometry", "ris_sizes", "ue_antennas", "num_ues", "channel",
        "budget", "methods", "trials", "master_seed", "normalization",
        "reference_method", "ao", "num_streams",
    }
    unknown = set(obj) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    try:
        channel = ChannelConfig(
            carrier_hz=float(obj["channel"]["carrier_hz"]),
            num_paths=int(obj["channel"].get("num_paths", 1)),
            los_only=bool(obj["channel"].get("los_only", True)),
        )
        bobj = obj.get("budget", {})
        budget = LinkBudget(
            bandwidth_hz=float(bobj.get("bandwidth_hz", 1.0)),
            tx_power=float(bobj.get("tx_power", 10.0)),
            noise_var=float(bobj.get("noise_var", 1.0)),
            apply_element_scaling=bool(bobj.get("apply_element_scaling", True)),
        )
        ao = obj.get("ao", {})
        cfg = ExperimentConfig(
            scenario=obj["scenario"],
            bs_geometry=_geometry_from_dict(obj["bs_geometry"], "bs_geometry"),
            ris_sizes=tuple(
                _geometry_from_dict(g, f"ris_sizes[{i}]") for i, g in enumerate(obj["ris_sizes"])
            ),
            ue_antennas=int(obj["ue_antennas"]),
            num_ues=int(obj["num_ues"]),
            channel=channel,
            budget=budget,
            methods=tuple(obj["methods"]),
            trials=int(obj["trials"]),
            master_seed=int(obj["master_seed"]),
            normalization=obj.get("normalization", "global_max"),
            reference_method=obj.get("reference_method"),
            ao_max_iters=int(ao.get("max_iters", 50)),
            ao_rel_tol=float(ao.get("rel_tol", 1e-4)),
            num_streams=int(obj.get("num_streams", 1)),
        )
    except DomainError as exc:
        raise ConfigurationError(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid config: {exc}") from exc
    validate_config(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return config_from_dict(obj)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = asdict(cfg)
    out["ris_sizes"] = [asdict(g) for g in cfg.ris_sizes]
    out["bs_geometry"] = asdict(cfg.bs_geometry)
    out["methods"] = list(cfg.methods)
    out["ao"] = {"max_iters": out.pop("ao_max_iters"), "rel_tol": out.pop("ao_rel_tol")}
    return out


# ---------------------------------------------------------------------------
# Trial evaluation


def _ue_geometry(cfg: ExperimentConfig) -> ArrayGeometry:
    return ula(cfg.ue_antennas)


def single_user_trial_link(cfg: ExperimentConfig, ris: ArrayGeometry, trial: int) -> LinkRealization:
    return draw_link(
        cfg.channel, cfg.bs_geometry, ris, [_ue_geometry(cfg)], cfg.master_seed, trial
    )


def multi_user_trial_links(cfg: ExperimentConfig, ris: ArrayGeometry, trial: int):
    return [
        draw_link(
            cfg.channel,
            cfg.bs_geometry,
            ris,
            [_ue_geometry(cfg)],
            cfg.master_seed,
            trial,
            link_base=u * _UE_LINK_STRIDE,
        )
        for u in range(cfg.num_ues)
    ]


def _eval_single_user_trial(cfg, ris, trial, include_timing):
    link = single_user_trial_link(cfg, ris, trial)
    g, h = link.g, link.h_per_ue[0]
    budget = cfg.budget.with_elements(ris.n)
    records = []
    ao_history = None
    for method in cfg.methods:
        t0 = time.perf_counter()
        if method == "decouple":
            sol = thin_decouple(g, h)
            rate = decoupled_rate_closed_form(sol.svd_g, sol.svd_h, budget, cfg.num_streams)
        elif method == "decouple_diag_projected":
            theta = project_full_to_diagonal(svd_decouple(g, h).theta)
            rate = _rate_for_theta(h, theta, g, budget, cfg.num_streams)
        elif method == "ao":
            _, _, ao_history = ao_diagonal_solve(g, h, budget, cfg.ao_max_iters, cfg.ao_rel_tol)
            rate = ao_history[-1]
        elif method == "random":
            rng = link_stream(cfg.master_seed, trial, _RANDOM_STREAM)
            theta = random_phase_diag(ris.n, rng)
            rate = _rate_for_theta(h, theta, g, budget, cfg.num_streams)
        else:  # pragma: no cover - guarded by validate_config
            raise ConfigurationError(f"unhandled method {method!r}")
        wall = time.perf_counter() - t0 if include_timing else 0.0
        records.append(TrialRecord(method, ris.n, trial, (rate,), rate, wall))
    return records, ao_history


def multi_user_trial_combination(cfg: ExperimentConfig, ris: ArrayGeometry, trial: int):
    """Per-UE thin solutions and their weighted combination for one trial."""
    links = multi_user_trial_links(cfg, ris, trial)
    sols = [thin_decouple(lk.g, lk.h_per_ue[0]) for lk in links]
    theta_mu = pa_combine([s.theta for s in sols], PAWeights.uniform(cfg.num_ues))
    return links, sols, theta_mu


def _eval_multi_user_trial(cfg, ris, trial, include_timing):
    links, sols, theta_mu = multi_user_trial_combination(cfg, ris, trial)
    budget = cfg.budget.with_elements(ris.n)
    p_k = cfg.budget.tx_power / cfg.num_ues
    records = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        if method == "perfect":
            thetas = [s.theta for s in sols]
        elif method == "pa":
            thetas = [theta_mu] * cfg.num_ues
        elif method == "unexpected":
            rng = link_stream(cfg.master_seed, trial, _UNEXPECTED_STREAM)
            rotated = haar_rotate_channels([lk.h_per_ue[0] for lk in links], rng)
            rates = [
                _rate_for_theta(
                    th, mirror_identity(ris.n), lk.g, budget.with_power(p_k), cfg.num_streams
                )
                for th, lk in zip(rotated, links)
            ]
            thetas = None
        elif method == "mirror":
            thetas = [mirror_identity(ris.n)] * cfg.num_ues
        else:  # pragma: no cover - guarded by validate_config
            raise ConfigurationError(f"unhandled method {method!r}")
        if thetas is not None:
            rates, _ = multiuser_sum_rate(
                links, thetas, budget, [p_k] * cfg.num_ues, cfg.num_streams
            )
        wall = time.perf_counter() - t0 if include_timing else 0.0
        records.append(TrialRecord(method, ris.n, trial, tuple(rates), float(sum(rates)), wall))
    return records, None


# ---------------------------------------------------------------------------
# Sweep drivers


def _run_sweep(cfg, eval_trial, threads, include_timing):
    validate_config(cfg)
    tasks = [(ris, t) for ris in cfg.ris_sizes for t in range(cfg.trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda rt: eval_trial(cfg, rt[0], rt[1], include_timing), tasks)
            )
    else:
        results = [eval_trial(cfg, ris, t, include_timing) for ris, t in tasks]
    records = []
    ao_histories = {}
    for (ris, t), (recs, hist) in zip(tasks, results):
        records.extend(recs)
        if hist is not None:
            ao_histories[(ris.n, t)] = hist
    aggregates = _aggregate(cfg, records)
    return SweepResult(
        config=config_to_dict(cfg),
        records=records,
        aggregates=aggregates,
        ao_histories=ao_histories,
    )


def run_single_user_sweep(cfg: ExperimentConfig, threads: int = 1, include_timing: bool = True) -> SweepResult:
    if cfg.scenario != "single_user":
        raise ConfigurationError("run_single_user_sweep requires scenario = single_user")
    return _run_sweep(cfg, _eval_single_user_trial, threads, include_timing)


def run_multi_user_sweep(cfg: ExperimentConfig, threads: int = 1, include_timing: bool = True) -> SweepResult:
    if cfg.scenario != "multi_user":
        raise ConfigurationError("run_multi_user_sweep requires scenario = multi_user")
    return _run_sweep(cfg, _eval_multi_user_trial, threads, include_timing)


def _aggregate(cfg, records):
    by_key = {}
    for rec in records:
        by_key.setdefault((rec.method, rec.n_ris), []).append(rec.sum_rate)
    means = {k: float(np.mean(v)) for k, v in by_key.items()}
    stds = {k: float(np.std(v)) for k, v in by_key.items()}
    if cfg.normalization == "global_max":
        top = max(means.values())
        norm = {k: means[k] / top for k in means}
    elif cfg.normalization == "reference_method":
        norm = {}
        for (method, n), mean in means.items():
            ref = means[(cfg.reference_method, n)]
            norm[(method, n)] = mean / ref if ref > 0 else 0.0
    else:
        norm = dict(means)
    return [
        Aggregate(method, n, means[(method, n)], stds[(method, n)], norm[(method, n)])
        for method, n in sorted(means)
    ]


# ---------------------------------------------------------------------------
# Persistence


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(result: SweepResult, path) -> None:
    """Records CSV plus a sibling <path>.summary.csv with aggregates."""
    lines = [CSV_HEADER]
    for rec in sorted(result.records, key=lambda r: (r.method, r.n_ris, r.trial)):
        rate_field = ";".join(_fmt(r) for r in rec.rates)
        lines.append(
            f"{rec.method},{rec.n_ris},{rec.trial},{rate_field},"
            f"{_fmt(rec.sum_rate)},{_fmt(rec.wall_time_s)}"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")

    slines = [SUMMARY_HEADER]
    for agg in sorted(result.aggregates, key=lambda a: (a.method, a.n_ris)):
        slines.append(
            f"{agg.method},{agg.n_ris},{_fmt(agg.mean_rate)},"
            f"{_fmt(agg.std_rate)},{_fmt(agg.normalized_mean)}"
        )
    with open(f"{path}.summary.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(slines) + "\n")


def read_csv_records(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigurationError(f"{path}: unexpected CSV header")
    records = []
    for line in lines[1:]:
        method, n_ris, trial, rate_field, sum_rate, wall = line.split(",")
        rates = tuple(float(r) for r in rate_field.split(";"))
        records.append(
            TrialRecord(method, int(n_ris), int(trial), rates, float(sum_rate), float(wall))
        )
    return records


# ---------------------------------------------------------------------------
# One-shot solve


def _theta_to_obj(theta: RegulationMatrix) -> dict:
    if theta.kind == "full":
        return {"representation": "full", "matrix": matrix_to_obj(theta.full)}
    if theta.kind == "diagonal":
        return {
            "representation": "diagonal",
            "phases": [[float(v.real), float(v.imag)] for v in theta.phases],
        }
    terms = [{"a": matrix_to_obj(a), "b": matrix_to_obj(b)} for a, b in theta.factors]
    if theta.kind == "thin":
        return {"representation": "thin", **terms[0]}
    return {"representation": "thin_sum", "terms": terms}


def solve_once(g_path, h_paths, method, out_path, budget: Optional[LinkBudget] = None) -> int:
    """Solve one instance from matrix JSON files and write the tagged result.

    Output JSON fields: theta, theta1, theta2 (null when not applicable),
    effective_channel (list when multiple UEs), rate_bps_hz.
    """
    h_paths = list(h_paths)
    if not h_paths:
        raise ConfigurationError("at least one h matrix required")
    g = load_matrix(g_path)
    hs = [load_matrix(p) for p in h_paths]
    for p, h in zip(h_paths, hs):
        if h.shape[0] != g.shape[0]:
            raise DomainError(
                f"{p}: h has {h.shape[0]} rows, expected {g.shape[0]} to match g"
            )
    if budget is None:
        budget = LinkBudget(element_scaling=g.shape[0])

    theta1_obj = theta2_obj = None
    if method in ("decouple", "thin"):
        if len(hs) != 1:
            raise ConfigurationError(f"method {method!r} takes exactly one h matrix")
        sol = svd_decouple(g, hs[0]) if method == "decouple" else thin_decouple(g, hs[0])
        theta = sol.theta
        theta1_obj = matrix_to_obj(sol.theta1)
        theta2_obj = matrix_to_obj(sol.theta2)
        effs = [effective_channel(hs[0], theta, g)]
    elif method == "mirror":
        if len(hs) != 1:
            raise ConfigurationError("method 'mirror' takes exactly one h matrix")
        theta = mirror_identity(g.shape[0])
        effs = [effective_channel(hs[0], theta, g)]
    elif method == "pa":
        if len(hs) < 2:
            raise ConfigurationError("method 'pa' requires at least two h matrices")
        sols = [thin_decouple(g, h) for h in hs]
        theta = pa_combine([s.theta for s in sols], PAWeights.uniform(len(hs)))
        effs = [effective_channel(h, theta, g) for h in hs]
    else:
        raise ConfigurationError(
            f"unknown solve method {method!r} (expected decouple, thin, mirror or pa)"
        )

    if len(effs) == 1:
        f = design_precoder(effs[0], 1)
        rate = achievable_rate(effs[0], f, budget)
        eff_obj = matrix_to_obj(effs[0])
    else:
        p_k = budget.tx_power / len(effs)
        rate = sum(
            _rate_for_theta(h, theta, g, budget.with_power(p_k)) for h in hs
        )
        eff_obj = [matrix_to_obj(e) for e in effs]

    out = {
        "theta": _theta_to_obj(theta),
        "theta1": theta1_obj,
        "theta2": theta2_obj,
        "effective_channel": eff_obj,
        "rate_bps_hz": float(rate),
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(out, fh)
    return 0


def resolve_threads(arg: Optional[str]) -> int:
    """--threads value, RISDC_THREADS fallback, default 1; 'auto' = cpu count."""
    value = arg if arg is not None else os.environ.get("RISDC_THREADS")
    if value is None:
        return 1
    if str(value).lower() == "auto":
        return os.cpu_count() or 1
    try:
        n = int(value)
    except ValueError as exc:
        raise ConfigurationError(f"invalid thread count {value!r}") from exc
    if n < 1:
        raise ConfigurationError("thread count must be >= 1")
    return n
