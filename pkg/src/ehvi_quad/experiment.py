"""Rank-agreement experiments: random densities, EHVI per method, Kendall tau.

A run draws ``trials`` random predictive densities around a front, computes
the EHVI of each with every requested method and summarises the agreement
between methods with Kendall's tau.  Trial ``i`` uses the random stream
``seed ^ i`` (density first, then Monte Carlo draws), so any subset of trials
can be reproduced on its own and parallel execution gives the same numbers
as a serial run.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .ehvi import ehvi_exact_2d, ehvi_gh, ehvi_mc, ehvi_reference
from .errors import ConfigError
from .fronts import FrontSpec, RefPolicy, Shape, generate_front, load_front
from .gaussians import GaussianDensity, diag_only, random_correlated, random_independent
from .hypervolume import ParetoFrontSet
from .numerics import RngStream
from .quadrature import gh_grid
from .stats import kendall_tau

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "ExperimentResult",
    "SweepRow",
    "build_front",
    "run_trials",
    "run_compare",
    "run_sweep",
    "run_grid_dump",
    "write_result",
]

INDEPENDENT = "INDEPENDENT"
CORRELATED = "CORRELATED"
FRONT_STREAM = 1 << 63
MONOTONE_SLACK = 0.02


@dataclass
class ExperimentConfig:
    shape: str = "concave"
    m: int = 2
    front_size: int = 50
    front: str | None = None
    ref_policy: str = "box"
    kind: str = INDEPENDENT
    trials: int = 100
    mc_samples: int = 10_000
    gh_nodes: tuple[int, ...] = tuple(range(3, 16))
    prune: float = 0.2
    seed: int = 0
    wishart_dof: int | None = None
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        self.kind = self.kind.upper()
        self.format = self.format.lower()
        self.gh_nodes = tuple(int(n) for n in self.gh_nodes)
        if self.kind not in (INDEPENDENT, CORRELATED):
            raise ConfigError(f"kind must be INDEPENDENT or CORRELATED, got {self.kind!r}")
        if self.trials < 2:
            raise ConfigError("trials must be >= 2")
        if self.mc_samples < 1:
            raise ConfigError("mc_samples must be >= 1")
        if not 0.0 <= self.prune < 1.0:
            raise ConfigError("prune rate must lie in [0, 1)")
        if not self.gh_nodes or min(self.gh_nodes) < 1:
            raise ConfigError("GH node counts must be >= 1")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        try:
            Shape(self.shape)
        except ValueError:
            raise ConfigError(f"unknown shape {self.shape!r}; choose from {[s.value for s in Shape]}") from None

    def baseline_method(self) -> str | None:
        """Name of the analytic baseline for this configuration, if any."""
        if self.m > 3:
            return None
        core = "EXACT2D" if self.m == 2 else "REFERENCE"
        return core if self.kind == INDEPENDENT else f"DIAG_{core}"

    def metadata(self) -> dict:
        meta = asdict(self)
        meta["gh_nodes"] = list(self.gh_nodes)
        meta.pop("out")
        meta["covariance_generator"] = (
            "diagonal, variance ~ U[1e-9 span, span]"
            if self.kind == INDEPENDENT
            else f"(1/dof) D W D, W ~ Wishart(I, dof={self.wishart_dof or self.m + 2}), D = diag(sqrt(span))"
        )
        meta["box_margin"] = 0.3
        return meta


@dataclass
class ExperimentRecord:
    trial: int
    density: GaussianDensity
    values: dict[str, float]
    evaluations: dict[str, int]
    timings_ns: dict[str, int] = field(default_factory=dict)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    front: ParetoFrontSet
    methods: list[str]
    records: list[ExperimentRecord]
    summaries: list[dict]

    def values(self, method: str) -> np.ndarray:
        return np.array([r.values[method] for r in self.records])

    def tau(self, a: str, b: str):
        return kendall_tau(self.values(a), self.values(b))


@dataclass
class SweepRow:
    method: str
    n: int | None
    parity: str
    nodes: int
    tau: float
    p_value: float
    monotone_ok: bool | None = None


def build_front(config: ExperimentConfig) -> ParetoFrontSet:
    policy = RefPolicy.parse(config.ref_policy)
    if config.front:
        return load_front(config.front, policy=policy)
    spec = FrontSpec(Shape(config.shape), config.m, config.front_size)
    return generate_front(spec, RngStream(config.seed).spawn(FRONT_STREAM), policy)


def _method_list(config: ExperimentConfig) -> list[str]:
    methods = ["MC"] + [f"GH{n}" for n in config.gh_nodes]
    base = config.baseline_method()
    if base:
        methods.append(base)
    return methods


def _evaluate(method: str, g: GaussianDensity, front: ParetoFrontSet, config: ExperimentConfig, rng: RngStream):
    if method == "MC":
        return ehvi_mc(g, front, config.mc_samples, rng)
    if method.startswith("GH"):
        return ehvi_gh(g, front, int(method[2:]), config.prune)
    target = diag_only(g) if method.startswith("DIAG_") else g
    if method.endswith("EXACT2D"):
        return ehvi_exact_2d(target, front)
    if method.endswith("REFERENCE"):
        return ehvi_reference(target, front)
    raise ConfigError(f"unknown method {method!r}")


def _run_one(i: int, config: ExperimentConfig, front: ParetoFrontSet, methods: list[str]) -> ExperimentRecord:
    rng = RngStream(config.seed).spawn(i)
    if config.kind == INDEPENDENT:
        g = random_independent(front, rng)
    else:
        g = random_correlated(front, rng, dof=config.wishart_dof)
    values, evaluations, timings = {}, {}, {}
    for method in methods:
        start = time.perf_counter_ns()
        est = _evaluate(method, g, front, config, rng)
        timings[method] = time.perf_counter_ns() - start
        values[method] = est.value
        evaluations[method] = est.evaluations
    return ExperimentRecord(i, g, values, evaluations, timings)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("EHVI_QUAD_THREADS", "1")))
    except ValueError:
        raise ConfigError("EHVI_QUAD_THREADS must be an integer") from None


def run_trials(config: ExperimentConfig, methods: list[str] | None = None) -> tuple[ParetoFrontSet, list[str], list[ExperimentRecord]]:
    front = build_front(config)
    if front.dim != config.m:
        config.m = front.dim
    methods = _method_list(config) if methods is None else methods
    workers = _threads()
    if workers == 1:
        records = [_run_one(i, config, front, methods) for i in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda i: _run_one(i, config, front, methods), range(config.trials)))
    return front, methods, records


def _summaries(methods: list[str], records: list[ExperimentRecord]) -> list[dict]:
    out = []
    for a, b in itertools.combinations(methods, 2):
        res = kendall_tau([r.values[a] for r in records], [r.values[b] for r in records])
        out.append({"a": a, "b": b, "tau": res.tau, "p_value": res.p_value, "n": res.n})
    return out


def run_compare(config: ExperimentConfig) -> ExperimentResult:
    """EHVI per trial for MC, every GH_n and the analytic baseline, plus pairwise tau."""
    front, methods, records = run_trials(config)
    return ExperimentResult(config, front, methods, records, _summaries(methods, records))


def run_sweep(config: ExperimentConfig) -> tuple[ExperimentResult, list[SweepRow]]:
    """Tau of GH_n against the baseline for each n, split into odd and even n.

    The baseline is the analytic EHVI for independent densities and Monte
    Carlo for correlated ones.  ``monotone_ok`` checks, as a diagnostic only,
    that tau does not fall by more than 0.02 from the previous n of the same
    parity.
    """
    if len(config.gh_nodes) < 2:
        raise ConfigError("a sweep needs at least two GH node counts")
    result = run_compare(config)
    base = config.baseline_method() if config.kind == INDEPENDENT else "MC"
    if base is None:
        raise ConfigError("no analytic baseline for m > 3; use the correlated kind (MC baseline)")
    others = ["MC"] if base != "MC" else ([config.baseline_method()] if config.baseline_method() else [])
    rows: list[SweepRow] = []
    last = {}
    for n in sorted(config.gh_nodes):
        res = result.tau(f"GH{n}", base)
        parity = "odd" if n % 2 else "even"
        prev = last.get(parity)
        ok = None if prev is None else bool(res.tau >= prev - MONOTONE_SLACK)
        last[parity] = res.tau
        nodes = result.records[0].evaluations[f"GH{n}"]
        rows.append(SweepRow(f"GH{n}", n, parity, nodes, res.tau, res.p_value, ok))
    for other in others:
        res = result.tau(other, base)
        rows.append(SweepRow(other, None, "-", result.records[0].evaluations[other], res.tau, res.p_value))
    return result, rows


def _atomic_write(path: str, text: str) -> None:
    """Write via a temporary sibling file so a failure leaves no partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise OSError(f"output directory {directory!r} does not exist")
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def run_grid_dump(mean, cov, n: int, r: float, out: str | None = None) -> str:
    """CSV of a Gauss-Hermite grid: columns x1..xm, weight; one row per node."""
    grid = gh_grid(GaussianDensity(mean, cov), n, r)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{j + 1}" for j in range(grid.dim)] + ["weight"])
    for node, w in zip(grid.nodes, grid.weights):
        writer.writerow([repr(float(v)) for v in node] + [repr(float(w))])
    text = buf.getvalue()
    if out:
        _atomic_write(out, text)
    return text


def _csv_columns(result: ExperimentResult) -> list[str]:
    m = result.front.dim
    cols = ["trial"] + [f"mean_{i + 1}" for i in range(m)]
    cols += [f"cov_{i + 1}{j + 1}" for i in range(m) for j in range(m)]
    for method in result.methods:
        cols += [method, f"{method}_evals"]
    return cols


def records_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_csv_columns(result))
    for rec in result.records:
        row = [rec.trial] + [repr(float(v)) for v in rec.density.mean]
        row += [repr(float(v)) for v in rec.density.cov.ravel()]
        for method in result.methods:
            row += [repr(rec.values[method]), rec.evaluations[method]]
        writer.writerow(row)
    return buf.getvalue()


def summaries_csv(summaries: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(summaries[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(summaries)
    return buf.getvalue()


def result_json(result: ExperimentResult, extra: dict | None = None) -> str:
    doc = {
        "config": result.config.metadata(),
        "front": {"points": result.front.points.tolist(), "reference": result.front.reference.tolist()},
        "records": [
            {
                "trial": rec.trial,
                "density": rec.density.to_record(),
                "values": rec.values,
                "evaluations": rec.evaluations,
            }
            for rec in result.records
        ],
        "summaries": result.summaries,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1) + "\n"


def timings_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial"] + result.methods)
    for rec in result.records:
        writer.writerow([rec.trial] + [rec.timings_ns[m] for m in result.methods])
    return buf.getvalue()


def write_result(result: ExperimentResult, out: str, fmt: str, extra: dict | None = None) -> list[str]:
    """Write records (and, for CSV, a ``.summary.csv`` sibling); returns the paths written.

    Timings are excluded so that equal configurations give byte-identical files.
    """
    if fmt == "json":
        _atomic_write(out, result_json(result, extra))
        return [out]
    stem, _ = os.path.splitext(out)
    summary_path = f"{stem}.summary.csv"
    _atomic_write(out, records_csv(result))
    summaries = result.summaries
    if extra and "sweep" in extra:
        summaries = extra["sweep"]
    _atomic_write(summary_path, summaries_csv(summaries))
    return [out, summary_path]
