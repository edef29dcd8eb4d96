"""Seeded experiments over generated instances, with CSV and JSON reports."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bits import CapabilityError, UsageError
from .functions import (
    ExplicitFunction,
    Junta,
    SparsePoly,
    Term,
    TermFunction,
    TruthTable,
    degree_members,
    distance_to_class,
    distance_to_juntas,
    sparse_poly_members,
)
from .oracle import FunctionOracle
from .rc_verifier import DEFAULT_ETA
from .rng import make_rng, trial_seeds
from .testers import TesterConfig, test_fourier_degree, test_k_junta, test_sparse_poly, test_sparse_poly_deg
from .verdict import Verdict

CLASSES = ("junta", "fourier", "sparse-deg", "sparse", "dnf")
FAR_ARITY_LIMIT = 16


@dataclass(frozen=True)
class InstanceSpec:
    cls: str
    n: int
    k: int = 2
    s: int = 2
    d: int = 2
    far: float | None = None

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise UsageError(f"unknown class {self.cls!r}; expected one of {CLASSES}")


@dataclass
class Instance:
    f: ExplicitFunction
    spec: InstanceSpec
    distance: Fraction | None = None
    note: str = ""


# --- in-class sampling ---------------------------------------------------------------


def random_junta(n: int, k: int, rng) -> Junta:
    coords = sorted(int(c) + 1 for c in rng.choice(n, size=min(k, n), replace=False))
    inner = rng.integers(0, 2, size=1 << len(coords)).astype(np.uint8)
    return Junta(n, tuple(coords), inner)


def random_sparse_poly(n: int, s: int, d: int, rng) -> SparsePoly:
    monos = []
    for _ in range(s):
        size = int(rng.integers(1, d + 1))
        monos.append(sum(1 << int(c) for c in rng.choice(n, size=size, replace=False)))
    return SparsePoly(n, monos)


def random_decision_tree(n: int, depth: int, rng) -> Junta:
    """Complete decision tree of the given depth with random node variables and random leaves.

    Its Fourier degree is at most ``depth``.
    """

    def build(level: int, used: tuple[int, ...]):
        if level == depth:
            return int(rng.integers(0, 2))
        free = [c for c in range(1, n + 1) if c not in used]
        v = int(rng.choice(free))
        return (v, build(level + 1, used + (v,)), build(level + 1, used + (v,)))

    tree = build(0, ())

    def evaluate(node, x):
        while not isinstance(node, int):
            v, lo, hi = node
            node = hi if (x >> (v - 1)) & 1 else lo
        return node

    coords = set()

    def collect(node):
        if not isinstance(node, int):
            coords.add(node[0])
            collect(node[1])
            collect(node[2])

    collect(tree)
    cs = sorted(coords)
    inner = np.zeros(1 << len(cs), dtype=np.uint8)
    for idx in range(1 << len(cs)):
        x = sum(((idx >> b) & 1) << (c - 1) for b, c in enumerate(cs))
        inner[idx] = evaluate(tree, x)
    return Junta(n, tuple(cs), inner)


def random_dnf(n: int, s: int, size: int, rng) -> TermFunction:
    terms = []
    for _ in range(s):
        vs = rng.choice(n, size=min(size, n), replace=False)
        signs = rng.integers(0, 2, size=len(vs))
        pos = sum(1 << int(v) for v, g in zip(vs, signs) if g)
        neg = sum(1 << int(v) for v, g in zip(vs, signs) if not g)
        terms.append(Term(pos, neg))
    return TermFunction.dnf(n, terms)


def sample_member(spec: InstanceSpec, rng) -> ExplicitFunction:
    if spec.cls == "junta":
        return random_junta(spec.n, spec.k, rng)
    if spec.cls == "fourier":
        return random_decision_tree(spec.n, spec.d, rng)
    if spec.cls in ("sparse-deg", "sparse"):
        return random_sparse_poly(spec.n, spec.s, spec.d, rng)
    return random_dnf(spec.n, spec.s, spec.d, rng)


# --- certified far instances --------------------------------------------------------------


def class_distance(f: ExplicitFunction, spec: InstanceSpec) -> Fraction:
    """Exact distance from ``f`` to the instance class (raises past desk scale)."""
    if spec.n > FAR_ARITY_LIMIT:
        raise CapabilityError(f"certified distances need n <= {FAR_ARITY_LIMIT}")
    if spec.cls == "junta":
        return distance_to_juntas(f, spec.k, spec.n)
    if spec.cls == "fourier":
        return distance_to_class(f, degree_members(spec.n, spec.d))
    if spec.cls == "sparse-deg":
        return distance_to_class(f, sparse_poly_members(spec.n, spec.s, spec.d))
    if spec.cls == "sparse":
        return distance_to_class(f, sparse_poly_members(spec.n, spec.s))
    raise CapabilityError(f"no exact distance oracle for class {spec.cls!r}")


def generate_instance(spec: InstanceSpec, seed=None, max_rounds: int = 40) -> Instance:
    """In-class sample, or a perturbed member with certified distance ``>= spec.far``.

    Far instances flip each truth-table entry of a class member with a rate
    that grows until the exact class distance reaches ``spec.far``.
    """
    rng = make_rng(seed)
    g = sample_member(spec, rng)
    if spec.far is None:
        return Instance(g, spec, Fraction(0), "in-class by construction")
    if spec.n > FAR_ARITY_LIMIT:
        raise CapabilityError(f"far instances need n <= {FAR_ARITY_LIMIT}")
    base = g.truth_table()
    rate = min(0.5, 1.5 * spec.far)
    best = Fraction(0)
    for _ in range(max_rounds):
        flips = (rng.random(len(base)) < rate).astype(np.uint8)
        f = TruthTable(spec.n, base ^ flips)
        dist = class_distance(f, spec)
        best = max(best, dist)
        if dist >= spec.far:
            return Instance(f, spec, dist, f"flip rate {rate:.3f}; distance by exact enumeration")
        rate = min(0.5, rate + 0.05)
    raise CapabilityError(f"far generation budget exhausted: best distance {best} < {spec.far}")


# --- experiments ---------------------------------------------------------------------------

TESTERS = {
    "junta": lambda o, sp, cfg, rng: test_k_junta(o, sp.n, sp.k, cfg.eps, cfg, rng),
    "fourier": lambda o, sp, cfg, rng: test_fourier_degree(o, sp.n, sp.d, cfg.eps, cfg, rng),
    "sparse-deg": lambda o, sp, cfg, rng: test_sparse_poly_deg(o, sp.n, sp.s, sp.d, cfg.eps, cfg, rng),
    "sparse": lambda o, sp, cfg, rng: test_sparse_poly(o, sp.n, sp.s, cfg.eps, cfg, rng),
}


@dataclass
class ExperimentConfig:
    spec: InstanceSpec
    trials: int = 20
    seed: int = 0
    eps_grid: tuple[float, ...] = (0.1,)
    eta: float = DEFAULT_ETA
    preset: str = "result3"
    workers: int = 1
    out: str | None = None
    transcripts: str | None = None

    def __post_init__(self):
        if self.spec.cls not in TESTERS:
            raise UsageError(f"no tester for class {self.spec.cls!r}")
        if self.trials < 0:
            raise UsageError("trials must be non-negative")


@dataclass
class TrialResult:
    eps: float
    index: int
    decision: str
    queries: int
    reject_stage: str | None
    stages: dict[str, int]


@dataclass
class StatsReport:
    tester: str
    rows: list[dict] = field(default_factory=list)
    instance: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def stage_names(self) -> list[str]:
        names = set()
        for r in self.rows:
            names |= set(r["mean_stage_queries"])
        return sorted(names)

    def to_csv(self) -> str:
        stages = self.stage_names()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tester", "eps", "trials", "accept_rate", "reject_rate", "q25", "q50", "q75", "mean_queries"]
                   + [f"mean_{s}" for s in stages])
        for r in self.rows:
            w.writerow([self.tester, _num(r["eps"]), r["trials"], _num(r["accept_rate"]), _num(r["reject_rate"]),
                        _num(r["q25"]), _num(r["q50"]), _num(r["q75"]), _num(r["mean_queries"])]
                       + [_num(r["mean_stage_queries"].get(s, 0.0)) for s in stages])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"tester": self.tester, "instance": self.instance, "config": self.config,
                           "rows": self.rows}, indent=2, sort_keys=True)

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        path.with_suffix(".json").write_text(self.to_json())


def _num(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _row(eps: float, results: list[TrialResult]) -> dict:
    m = len(results)
    qs = np.array([r.queries for r in results], dtype=np.float64)
    stages: dict[str, float] = {}
    for r in results:
        for s, c in r.stages.items():
            stages[s] = stages.get(s, 0) + c
    rejects: dict[str, int] = {}
    for r in results:
        if r.reject_stage:
            rejects[r.reject_stage] = rejects.get(r.reject_stage, 0) + 1
    acc = sum(r.decision == "Accept" for r in results)
    quart = np.percentile(qs, [25, 50, 75]).tolist() if m else [0.0, 0.0, 0.0]
    return {
        "eps": eps,
        "trials": m,
        "accept_rate": acc / m if m else 0.0,
        "reject_rate": (m - acc) / m if m else 0.0,
        "q25": quart[0], "q50": quart[1], "q75": quart[2],
        "mean_queries": float(qs.mean()) if m else 0.0,
        "mean_stage_queries": {s: c / m for s, c in sorted(stages.items())},
        "reject_stages": dict(sorted(rejects.items())),
    }


def run_trial(instance: Instance, cfg: ExperimentConfig, eps: float, index: int, seed,
              transcript_path: Path | None = None) -> TrialResult:
    oracle = FunctionOracle(instance.f, record=transcript_path is not None)
    tcfg = TesterConfig(eps=eps, eta=cfg.eta, preset=cfg.preset)
    v: Verdict = TESTERS[cfg.spec.cls](oracle, cfg.spec, tcfg, make_rng(seed))
    if transcript_path is not None:
        transcript_path.write_text("".join(line + "\n" for line in oracle.transcript_lines()))
    stages = {k: c for k, c in sorted(oracle.stage_counts.items())}
    return TrialResult(eps, index, v.decision, oracle.queries_used, v.reject_stage, stages)


def run_experiment(cfg: ExperimentConfig, instance: Instance | None = None) -> StatsReport:
    """Run ``trials`` seeded verdicts per ``eps``; the report depends only on the config."""
    start = time.perf_counter()
    if instance is None:
        instance = generate_instance(cfg.spec, np.random.SeedSequence(cfg.seed).spawn(1)[0])
    seeds = trial_seeds(cfg.seed + 1, len(cfg.eps_grid) * cfg.trials)
    tdir = Path(cfg.transcripts) if cfg.transcripts else None
    if tdir is not None:
        tdir.mkdir(parents=True, exist_ok=True)
    jobs = []
    for e_idx, eps in enumerate(cfg.eps_grid):
        for i in range(cfg.trials):
            path = tdir / f"eps{e_idx}_trial{i:04d}.jsonl" if tdir is not None else None
            jobs.append((eps, i, seeds[e_idx * cfg.trials + i], path))

    def work(job):
        eps, i, seed, path = job
        return run_trial(instance, cfg, eps, i, seed, path)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    report = StatsReport(cfg.spec.cls)
    report.instance = {"spec": asdict(cfg.spec), "distance": str(instance.distance), "note": instance.note}
    report.config = {"trials": cfg.trials, "seed": cfg.seed, "eps_grid": list(cfg.eps_grid), "eta": cfg.eta,
                     "preset": cfg.preset}
    if cfg.trials:
        for eps in cfg.eps_grid:
            report.rows.append(_row(eps, [r for r in results if r.eps == eps]))
    if cfg.out:
        report.write(cfg.out)
        Path(cfg.out).with_suffix(".timing.json").write_text(
            json.dumps({"wall_seconds": time.perf_counter() - start}) + "\n")
    return report


def fit_inverse(eps: list[float], q: list[float]) -> tuple[float, float, list[float]]:
    """Least-squares fit ``q = A + B/eps``; returns ``(A, B, residual / (B/eps))`` per point."""
    X = np.column_stack([np.ones(len(eps)), 1 / np.asarray(eps, dtype=float)])
    (A, B), *_ = np.linalg.lstsq(X, np.asarray(q, dtype=float), rcond=None)
    rel = [abs(qi - (A + B / e)) / (B / e) if B else math.inf for e, qi in zip(eps, q)]
    return float(A), float(B), rel

