"""Command-line experiment runner.

Every subcommand writes its files into the ``--out`` directory together with
``manifest.json`` (file names and SHA-256 hashes). Exit codes: 0 success,
1 task failure, 2 invalid configuration (nothing written), 3 a verification
check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

import networkx as nx
import numpy as np

from . import estimators as est
from . import io, verify
from .exact import StateSpaceTooLarge, enumerate_measure
from .graph import (
    BoundaryCondition, Graph, GraphError, apply_boundary_condition, attach_ghost, build_box,
    build_torus, named_graph,
)
from .models import ModelError, ModelSpec
from .samplers import ChainConfig, SampleBatch, SamplerError, sample

EXIT_OK, EXIT_TASK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


class VerificationFailed(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = [float(t) for t in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"bad grid {text!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(n, 0))]
    return [float(t) for t in text.split(",") if t.strip()]


def graph_from_spec(spec) -> Graph:
    """Graph from a config dict or a name / file path string."""
    if isinstance(spec, str):
        spec = {"file": spec} if Path(spec).is_file() else {"name": spec}
    try:
        if "file" in spec:
            g = Graph.load(spec["file"])
        elif "name" in spec:
            g = named_graph(spec["name"])
        elif "box" in spec:
            g = build_box(*map(int, spec["box"]))
        elif "torus" in spec:
            g = build_torus(*map(int, spec["torus"]))
        else:
            raise ConfigError("graph spec needs one of file/name/box/torus")
        bc = spec.get("boundary_condition", "free")
        if bc != "free" and g.boundary:
            blocks = [sorted(g.boundary)] if bc == "wired" else bc
            g, _ = apply_boundary_condition(g, BoundaryCondition.of(blocks))
        if spec.get("ghost") and g.ghost is None:
            g = attach_ghost(g)
    except (GraphError, OSError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid graph: {exc}") from exc
    return g


def model_from_spec(spec: dict) -> ModelSpec:
    try:
        return ModelSpec.from_json(spec)
    except (ModelError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc


def _model_from_args(args) -> ModelSpec:
    fields = {"tag": args.model}
    for name in ("beta", "h", "p", "q", "x"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    if getattr(args, "convention", None):
        fields["energy_convention"] = args.convention
    return model_from_spec(fields)


def _chain_from_args(args, base: dict | None = None) -> ChainConfig:
    data = dict(base or {})
    for name in ("seed", "burn_in", "thinning", "n_samples", "n_chains"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    try:
        return ChainConfig.from_json(data)
    except (SamplerError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid chain: {exc}") from exc


class Outputs:
    """Tracks written files and emits the manifest."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.files: list[str] = []
        self._lock = threading.Lock()

    def path(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        with self._lock:
            self.files.append(name)
        return self.root / name

    def manifest(self, extra: dict | None = None) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        entries = []
        for name in sorted(set(self.files)):
            p = self.root / name
            if p.exists():
                entries.append({"file": name, "sha256": io.sha256_file(p), "bytes": p.stat().st_size})
                for aux in (Path(str(p) + ".json"), Path(str(p) + ".spins")):
                    if aux.exists():
                        entries.append({"file": aux.name, "sha256": io.sha256_file(aux),
                                        "bytes": aux.stat().st_size})
        data = {"files": entries}
        if extra:
            data.update(extra)
        target = self.root / "manifest.json"
        io.write_json(target, data)
        return target


# ---------------------------------------------------------------------------
# task implementations (shared by subcommands and ``run``)
# ---------------------------------------------------------------------------

class Context:
    """Lazily computed inputs shared between tasks of one experiment."""

    def __init__(self, graph: Graph, model: ModelSpec | None, chain: ChainConfig, workers: int):
        self.graph = graph
        self.model = model
        self.chain = chain
        self.workers = workers
        self._lock = threading.Lock()
        self._batch: SampleBatch | None = None
        self._exact = None

    def batch(self) -> SampleBatch:
        with self._lock:
            if self._batch is None:
                if self.model is None:
                    raise ConfigError("sampling needs a model")
                self._batch = sample(self.graph, self.model, self.chain, self.workers)
            return self._batch

    def exact(self):
        with self._lock:
            if self._exact is None:
                self._exact = enumerate_measure(self.graph, self.model)
            return self._exact

    def source(self, task: dict):
        return self.exact() if task.get("source", "mc") == "exact" else self.batch()


def _distance(g: Graph, a: int, b: int) -> float:
    """l1 distance of the embedding, else graph distance (ghost edges excluded)."""
    if g.embedding is not None and a in g.real_vertices and b in g.real_vertices:
        return float(np.abs(np.subtract(g.embedding[a], g.embedding[b])).sum())
    nxg = nx.Graph(g.edges[: g.n_internal_edges])
    nxg.add_nodes_from(g.real_vertices)
    try:
        return float(nx.shortest_path_length(nxg, a, b))
    except nx.NetworkXNoPath:
        return math.inf


def _connectivity_rows(ctx: Context, task: dict):
    g = ctx.graph
    src = ctx.source(task)
    a = g.vertex(task.get("a", 0))
    targets = task.get("b")
    targets = [g.vertex(t) for t in targets] if targets is not None else [
        v for v in g.real_vertices if v != a
    ]
    ghost_free = bool(task.get("ghost_free", False))
    by_distance: dict[float, list[int]] = {}
    for t in targets:
        by_distance.setdefault(_distance(g, a, t), []).append(t)
    rows = []
    for dist in sorted(by_distance):
        group = by_distance[dist]
        if isinstance(src, SampleBatch):
            hits = np.mean([est.connection_events(src, a, t, ghost_free) for t in group], axis=0)
            n = len(hits)
            se = float(hits.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            if len(group) == 1:
                m = float(hits.mean())
                se = math.sqrt(max(m * (1 - m), 0.0) / n)
            rows.append((dist, float(hits.mean()), se))
        else:
            taus = [est.connectivity(src, a, t, ghost_free).mean for t in group]
            rows.append((dist, float(np.mean(taus)), 0.0))
    return rows


def task_connectivity(ctx, task, out: Outputs, name: str):
    rows = _connectivity_rows(ctx, task)
    io.write_csv(out.path(f"{name}.csv"), ["distance", "tau", "stderr"], rows)


def task_fit(ctx, task, out, name):
    rows = [r for r in _connectivity_rows(ctx, task) if r[1] > 0]
    window = task.get("window")
    fit = est.fit_correlation_length([r[0] for r in rows], [r[1] for r in rows],
                                     tuple(window) if window else None)
    io.write_json(out.path(f"{name}.json"), fit.to_json())


def task_reach(ctx, task, out, name):
    g = ctx.graph
    src = ctx.source(task)
    origin = g.vertex(task["origin"]) if "origin" in task else None
    k_max = int(task.get("k_max", max(map(abs, (c for xs in g.embedding for c in xs)))))
    rows = []
    for k in range(k_max + 1):
        r = est.boundary_reach(src, k, origin)
        rows.append((k, r.mean, r.stderr))
    io.write_csv(out.path(f"{name}.csv"), ["k", "reach", "stderr"], rows)


def _single_estimate(path, r: est.EstimateResult):
    io.write_csv(path, ["estimate", "stderr", "n"], [(r.mean, r.stderr, r.n)])


def task_crossing(ctx, task, out, name):
    r = est.crossing_probability(ctx.source(task), task.get("direction", "horizontal"))
    _single_estimate(out.path(f"{name}.csv"), r)


def task_wrap(ctx, task, out, name):
    r = est.wrap_around_probability(ctx.source(task), task.get("axis"))
    _single_estimate(out.path(f"{name}.csv"), r)


def task_spin_two_point(ctx, task, out, name):
    g = ctx.graph
    src = ctx.source(task)
    a = g.vertex(task.get("a", 0))
    rows = []
    for b in task.get("b") or [v for v in g.real_vertices if v != a]:
        b = g.vertex(b)
        r = est.spin_two_point(src, a, b)
        t = est.truncated(src, a, b)
        rows.append((b, _distance(g, a, b), r.mean, r.stderr, t.mean, t.stderr))
    io.write_csv(out.path(f"{name}.csv"),
                 ["b", "distance", "two_point", "stderr", "truncated", "truncated_stderr"], rows)


def task_criterion(ctx, task, out, name):
    g = ctx.graph
    mode = task.get("mode", "exact")
    rep = est.finite_size_criterion(
        g, ctx.model, g.vertex(task.get("x0", 0)), task.get("K"), task.get("d"), mode,
        batch=ctx.batch() if mode == "mc" else None,
    )
    io.write_json(out.path(f"{name}.json"), rep.to_json())


def task_enumerate(ctx, task, out, name):
    io.write_distribution_csv(out.path(f"{name}.csv"), ctx.exact())


def task_sample(ctx, task, out, name):
    io.write_batch(out.path(f"{name}.hex"), ctx.batch())


def _verify_reports(g: Graph, task: dict, chain: ChainConfig) -> list[verify.CheckReport]:
    beta = float(task.get("beta", 0.5))
    h = float(task.get("h", 0.0))
    checks = task.get("checks", ["couplings", "edwards_sokal", "dcisgr"])
    mode = task.get("mode", "exact")
    tol = float(task.get("tol", 1e-10))
    jobs: list[Callable] = []
    for c in checks:
        if c == "couplings":
            jobs.append(lambda: verify.check_coupling_identities(g, beta, tol, mode=mode, chain=chain))
        elif c == "edwards_sokal":
            jobs.append(lambda: verify.check_edwards_sokal(g, beta, h, tol))
        elif c == "dcisgr":
            jobs.append(lambda: verify.check_double_current_identity([g], [beta], tol))
        elif c == "decay":
            jobs.append(lambda: verify.check_decay_bounds(
                g if g.dimension == 2 and g.boundary else None, task.get("p_list", (0.05, 0.1, 0.2))))
        elif c == "dmp":
            inner = graph_from_spec(task["inner"])
            m = ModelSpec.random_cluster(task.get("p", 0.5), task.get("q", 2.0))
            jobs.append(lambda: verify.check_dmp(g, inner, m))
        else:
            raise ConfigError(f"unknown check {c!r}")
    return verify.run_suite(jobs, workers=int(task.get("workers", 1)))


def task_verify(ctx, task, out, name):
    reports = _verify_reports(ctx.graph, task, ctx.chain)
    verify.write_reports(out.path(f"{name}.jsonl"), reports)
    if not verify.all_passed(reports):
        raise VerificationFailed(f"{sum(not r.passed for r in reports)} checks failed")


def kertesz_rows(d: int, q: float, p_grid, k: int):
    lower = est.kertesz_lower(d, k)
    rows = []
    for p in p_grid:
        upper = est.kertesz_upper(p) if (d == 2 and q == 2) else math.nan
        rows.append((p, upper, lower))
    return rows


def task_kertesz(ctx, task, out, name):
    grid = task.get("p_grid", "0.6:0.9:0.05")
    grid = parse_grid(grid) if isinstance(grid, str) else list(grid)
    rows = kertesz_rows(int(task.get("d", 2)), float(task.get("q", 2.0)), grid, int(task.get("k", 1)))
    io.write_csv(out.path(f"{name}.csv"), ["p", "h_upper_bound", "p_h_lower_threshold"], rows)


def task_scan(ctx, task, out, name):
    family = task.get("family", "two-cycle")
    max_edges = int(task.get("max_edges", 10))
    if family == "two-cycle":
        graphs = verify.two_cycle_family(max_edges, bool(task.get("unequal_only", True)))
    elif family == "cycles":
        graphs = verify.single_cycle_family(max_edges)
    else:
        raise ConfigError(f"unknown family {family!r}")
    reports = verify.scan_monotonicity(graphs, all_pairs=True)
    _write_scan(out, name, reports, max_edges)


def _write_scan(out: Outputs, name: str, reports, max_edges: int):
    rows = []
    for r in reports:
        rows.append((r.name, r.data["a"], r.data["b"], int(r.passed),
                     ";".join(f"{lo:.6f}-{hi:.6f}" for lo, hi in r.data["intervals"])))
    io.write_csv(out.path(f"{name}.csv"), ["graph", "a", "b", "monotone", "decreasing_intervals"], rows)
    witnesses = [r.to_json() for r in reports if not r.passed]
    io.write_json(out.path(f"{name}_summary.json"), {
        "scanned": len(reports), "witnesses": len(witnesses), "max_edges": max_edges,
        "result": "witness found" if witnesses else f"no witness up to {max_edges} edges",
        "witness_reports": witnesses[:10],
    })


TASKS: dict[str, Callable] = {
    "connectivity": task_connectivity,
    "fit": task_fit,
    "reach": task_reach,
    "crossing": task_crossing,
    "wrap": task_wrap,
    "spin_two_point": task_spin_two_point,
    "criterion": task_criterion,
    "enumerate": task_enumerate,
    "sample": task_sample,
    "verify": task_verify,
    "kertesz": task_kertesz,
    "scan": task_scan,
}

NEEDS_MODEL = {"connectivity", "fit", "reach", "crossing", "wrap", "spin_two_point", "criterion",
               "enumerate", "sample"}


# ---------------------------------------------------------------------------
# experiment runner
# ---------------------------------------------------------------------------

def _validate_vertices(g: Graph, task: dict):
    for key in ("a", "x0", "origin"):
        if key in task:
            v = g.vertex(task[key])
            if g.ghost is not None and v == g.ghost:
                raise GraphError(f"{key} refers to the ghost")
    for ref in task.get("b") or []:
        g.vertex(ref)


def load_experiment(data: dict, seed=None, workers=None, out=None):
    """Validate a config dict; raises :class:`ConfigError` on any problem."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "graph" not in data:
        raise ConfigError("config needs a graph")
    g = graph_from_spec(data["graph"])
    model = model_from_spec(data["model"]) if data.get("model") else None
    chain_data = dict(data.get("chain") or {})
    if seed is not None:
        chain_data["seed"] = seed
    elif "seed" in data:
        chain_data.setdefault("seed", data["seed"])
    try:
        chain = ChainConfig.from_json(chain_data)
    except (SamplerError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid chain: {exc}") from exc
    tasks = data.get("tasks") or []
    if not isinstance(tasks, list):
        raise ConfigError("tasks must be a list")
    for i, task in enumerate(tasks):
        kind = task.get("type")
        if kind not in TASKS:
            raise ConfigError(f"task {i}: unknown type {kind!r}")
        if kind in NEEDS_MODEL and model is None:
            raise ConfigError(f"task {i}: {kind} needs a model")
        try:
            _validate_vertices(g, task)
        except GraphError as exc:
            raise ConfigError(f"task {i}: {exc}") from exc
    workers = int(workers if workers is not None else data.get("workers", 1))
    out_dir = out if out is not None else data.get("out", "out")
    return g, model, chain, tasks, workers, Path(out_dir)


def run_experiment(data: dict, seed=None, workers=None, out=None) -> int:
    try:
        g, model, chain, tasks, workers, out_dir = load_experiment(data, seed, workers, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outputs = Outputs(out_dir)
    ctx = Context(g, model, chain, workers)
    status: dict[int, str] = {}

    def run_task(i: int):
        task = tasks[i]
        name = task.get("name") or f"{i:02d}_{task['type']}"
        try:
            TASKS[task["type"]](ctx, task, outputs, name)
            status[i] = "ok"
        except VerificationFailed as exc:
            status[i] = f"verification failed: {exc}"
        except Exception as exc:  # task failure is reported, not raised
            status[i] = f"error: {type(exc).__name__}: {exc}"

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_task, range(len(tasks))))
    else:
        for i in range(len(tasks)):
            run_task(i)
    outputs.manifest({"graph": g.key, "seed": chain.seed, "workers": workers,
                      "tasks": [status[i] for i in range(len(tasks))]})
    for i in range(len(tasks)):
        if status[i] != "ok":
            print(f"task {i}: {status[i]}", file=sys.stderr)
    if any(s.startswith("error") for s in status.values()):
        return EXIT_TASK
    if any(s.startswith("verification") for s in status.values()):
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON experiment file; flags override its fields")
    p.add_argument("--seed", type=int, help="top-level random seed")
    p.add_argument("--workers", type=int, help="worker threads")
    p.add_argument("--out", help="output directory (default: out)")


def _graph_args(p: argparse.ArgumentParser):
    p.add_argument("--graph", help="graph name (cycle4, K4, path6, grid3x2, box2:1, torus2:2, ...) or JSON file")
    p.add_argument("--ghost", action="store_true", help="attach a ghost vertex")
    p.add_argument("--bc", default="free", choices=["free", "wired"], help="boundary condition")


def _model_args(p: argparse.ArgumentParser):
    p.add_argument("--model", help="ising, bernoulli, random-cluster, loop-o1, single-current, double-current")
    p.add_argument("--beta", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--convention", choices=["pair_product", "disagreement_count"])


def _chain_args(p: argparse.ArgumentParser):
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--thinning", type=int)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--n-chains", dest="n_chains", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gibbs-lattice",
        description="Exact and Monte Carlo experiments for the Ising model and its graphical representations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="write a graph JSON file")
    _common(p)
    _graph_args(p)
    p.add_argument("--name", default="graph.json", help="output file name")

    p = sub.add_parser("enumerate", help="exact law of a model as CSV")
    _common(p)
    _graph_args(p)
    _model_args(p)

    p = sub.add_parser("sample", help="run a sampler and write hex lines plus a JSON sidecar")
    _common(p)
    _graph_args(p)
    _model_args(p)
    _chain_args(p)

    p = sub.add_parser("estimate", help="estimators over a batch or an exact law")
    _common(p)
    _graph_args(p)
    _model_args(p)
    _chain_args(p)
    p.add_argument("--task", required=True, choices=sorted(k for k in TASKS if k in NEEDS_MODEL))
    p.add_argument("--batch", help="batch file written by 'sample' (otherwise sample afresh)")
    p.add_argument("--exact", action="store_true", help="use the exact law instead of samples")
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--b", type=int, nargs="*")
    p.add_argument("--ghost-free", action="store_true")
    p.add_argument("--direction", default="horizontal")
    p.add_argument("--axis", type=int)
    p.add_argument("--K", type=float)
    p.add_argument("--d", type=int)

    p = sub.add_parser("verify", help="run verification checks; exit 3 on failure")
    _common(p)
    _graph_args(p)
    _chain_args(p)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--tol", type=float, default=1e-10, help="tolerance for each check")
    p.add_argument("--checks", default="couplings,edwards_sokal,dcisgr",
                   help="comma list from couplings, edwards_sokal, dcisgr, decay")

    p = sub.add_parser("kertesz", help="analytic Kertész bound curves over a p grid")
    _common(p)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p-grid", dest="p_grid", default="0.6:0.9:0.05")
    p.add_argument("--h-grid", dest="h_grid", help="also sample ghost-free reach proxies on this h grid")
    p.add_argument("--box", type=int, default=4, help="box radius for the proxies")
    _chain_args(p)

    p = sub.add_parser("scan", help="monotonicity scan of loop O(1) connection probabilities")
    _common(p)
    p.add_argument("--family", choices=["two-cycle", "cycles"], default="two-cycle")
    p.add_argument("--max-edges", dest="max_edges", type=int, default=10)
    p.add_argument("--include-equal", action="store_true", help="also glue cycles of equal length")

    p = sub.add_parser("run", help="run an experiment config")
    _common(p)
    return parser


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc


def _graph_spec(args, cfg: dict):
    if args.graph:
        spec = {"file": args.graph} if Path(args.graph).is_file() else {"name": args.graph}
    elif "graph" in cfg:
        spec = dict(cfg["graph"]) if isinstance(cfg["graph"], dict) else cfg["graph"]
    else:
        raise ConfigError("no graph given")
    if isinstance(spec, dict):
        if args.ghost:
            spec["ghost"] = True
        if args.bc != "free":
            spec["boundary_condition"] = args.bc
    return spec


def _subcommand_experiment(args, cfg: dict) -> dict:
    """Translate a subcommand into a one-task experiment config."""
    data: dict = {"graph": _graph_spec(args, cfg)} if args.command not in ("kertesz", "scan") else {
        "graph": {"name": "path2"}}
    if getattr(args, "model", None):
        data["model"] = _model_from_args(args).to_json()
    elif cfg.get("model"):
        data["model"] = cfg["model"]
    chain = dict(cfg.get("chain") or {})
    for name in ("burn_in", "thinning", "n_samples", "n_chains"):
        value = getattr(args, name, None)
        if value is not None:
            chain[name] = value
    data["chain"] = chain
    cmd = args.command
    if cmd == "enumerate":
        task = {"type": "enumerate", "name": "distribution"}
    elif cmd == "sample":
        task = {"type": "sample", "name": "samples"}
    elif cmd == "estimate":
        task = {"type": args.task, "name": args.task, "source": "exact" if args.exact else "mc"}
        if args.a is not None:
            task["a" if args.task != "criterion" else "x0"] = args.a
        if args.b:
            task["b"] = args.b
        if args.ghost_free:
            task["ghost_free"] = True
        task["direction"] = args.direction
        if args.axis is not None:
            task["axis"] = args.axis
        if args.K is not None:
            task["K"] = args.K
        if args.d is not None:
            task["d"] = args.d
        if args.task == "criterion":
            task["mode"] = "exact" if args.exact else "mc"
        if args.batch:
            data["_batch"] = args.batch
    elif cmd == "verify":
        task = {"type": "verify", "name": "verify", "beta": args.beta, "h": args.h, "mode": args.mode, "tol": args.tol,
                "checks": [c.strip() for c in args.checks.split(",") if c.strip()]}
    elif cmd == "kertesz":
        task = {"type": "kertesz", "name": "kertesz", "d": args.d, "q": args.q, "k": args.k,
                "p_grid": parse_grid(args.p_grid)}
    elif cmd == "scan":
        task = {"type": "scan", "name": "scan", "family": args.family, "max_edges": args.max_edges,
                "unequal_only": not args.include_equal}
    else:
        raise ConfigError(f"unknown command {cmd}")
    data["tasks"] = [task]
    return data


def _run_subcommand(args, cfg: dict) -> int:
    try:
        data = _subcommand_experiment(args, cfg)
        g, model, chain, tasks, workers, out_dir = load_experiment(
            data, args.seed, args.workers, args.out or cfg.get("out"))
        batch = None
        if data.get("_batch"):
            batch = io.read_batch(data["_batch"], g)
    except (ConfigError, GraphError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "kertesz":
        try:
            grid = parse_grid(args.p_grid)
            h_grid = parse_grid(args.h_grid) if args.h_grid else None
        except (ConfigError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    outputs = Outputs(out_dir)
    ctx = Context(g, model, chain, workers)
    if batch is not None:
        ctx._batch = batch
    task = tasks[0]
    try:
        TASKS[task["type"]](ctx, task, outputs, task["name"])
        if args.command == "kertesz" and h_grid:
            _kertesz_proxies(outputs, grid, h_grid, args.box, chain, workers)
    except VerificationFailed as exc:
        outputs.manifest({"graph": g.key, "seed": chain.seed, "workers": workers})
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (StateSpaceTooLarge, GraphError, ModelError, SamplerError, ConfigError, ValueError) as exc:
        outputs.manifest({"graph": g.key, "seed": chain.seed, "workers": workers})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TASK
    outputs.manifest({"graph": g.key, "seed": chain.seed, "workers": workers})
    if args.command == "enumerate":
        dist = ctx.exact()
        print(f"Z = {dist.Z!r}  support = {len(dist.support)}")
    return EXIT_OK


def _kertesz_proxies(outputs: Outputs, p_grid, h_grid, radius: int, chain: ChainConfig, workers: int):
    """Ghost-free reach of the box boundary under the random-cluster measure with field."""
    g = attach_ghost(build_box(2, radius))
    rows = []
    for p in p_grid:
        for h in h_grid:
            batch = sample(g, ModelSpec.random_cluster(p, 2.0, h), chain, workers)
            r = est.boundary_reach(batch, radius)
            rows.append((p, h, ModelSpec.random_cluster(p, 2.0, h).p_h, r.mean, r.stderr))
    io.write_csv(outputs.path("kertesz_proxy.csv"), ["p", "h", "p_h", "ghost_free_reach", "stderr"], rows)


def _build_graph(args, cfg: dict) -> int:
    try:
        g = graph_from_spec(_graph_spec(args, cfg))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outputs = Outputs(Path(args.out or cfg.get("out", "out")))
    g.save(outputs.path(args.name))
    outputs.manifest({"graph": g.key})
    print(f"{g.n_vertices} vertices, {g.n_edges} edges, key {g.key}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        if not args.config:
            print("error: run needs --config", file=sys.stderr)
            return EXIT_CONFIG
        return run_experiment(cfg, args.seed, args.workers, args.out)
    if args.command == "build-graph":
        return _build_graph(args, cfg)
    return _run_subcommand(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
