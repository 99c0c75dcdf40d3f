"""File formats: graphs (JSON), exact laws (CSV), batches (hex lines + JSON sidecar).

All text files use LF line endings and '.' as decimal separator.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exact import ExactDistribution, bits_to_codes, codes_to_bits
from .graph import Graph, GraphError
from .models import ModelSpec
from .samplers import ChainConfig, SampleBatch


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_graph(path, g: Graph) -> None:
    g.save(path)


def read_graph(path) -> Graph:
    return Graph.load(path)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    return rows[0], rows[1:]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# exact laws
# ---------------------------------------------------------------------------

def _hex_width(n_bits: int) -> int:
    return max(1, (n_bits + 3) // 4)


def write_distribution_csv(path, dist: ExactDistribution) -> None:
    """Support rows ``config_bits_hex, weight, probability``.

    The first line is ``# {json}`` with the graph hash, model and log Z.
    """
    meta = {
        "kind": dist.kind,
        "n_bits": dist.n_bits,
        "graph": dist.graph.key if dist.graph is not None else None,
        "model": dist.model.to_json() if dist.model is not None else None,
        "log_Z": dist.log_Z,
    }
    width = _hex_width(dist.n_bits)
    Z = dist.Z
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["config_bits_hex", "weight", "probability"])
        for code in dist.support:
            p = float(dist.probs[code])
            w.writerow([format(int(code), f"0{width}x"), repr(p * Z), repr(p)])


def read_distribution_csv(path, graph: Graph | None = None) -> ExactDistribution:
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("# "):
        raise ValueError("distribution CSV lacks its metadata line")
    meta = json.loads(first[2:])
    header, rows = read_csv(path)
    if header != ["config_bits_hex", "weight", "probability"]:
        raise ValueError("unexpected distribution CSV columns")
    probs = np.zeros(1 << meta["n_bits"])
    for code, _, p in rows:
        probs[int(code, 16)] = float(p)
    model = ModelSpec.from_json(meta["model"]) if meta.get("model") else None
    if graph is not None and meta.get("graph") not in (None, graph.key):
        raise GraphError("distribution was computed on a different graph")
    return ExactDistribution(meta["kind"], meta["n_bits"], probs, meta["log_Z"], graph, model)


# ---------------------------------------------------------------------------
# batches
# ---------------------------------------------------------------------------

def _row_bits(batch: SampleBatch) -> np.ndarray:
    if batch.kind == "edge":
        return batch.data
    return (batch.data[:, list(batch.graph.real_vertices)] > 0).astype(np.uint8)


def _encode(bits: np.ndarray) -> list[str]:
    width = _hex_width(bits.shape[1])
    if bits.shape[1] <= 62:
        return [format(int(c), f"0{width}x") for c in bits_to_codes(bits)]
    weights = [1 << i for i in range(bits.shape[1])]
    return [format(sum(w for w, b in zip(weights, row) if b), f"0{width}x") for row in bits.tolist()]


def _decode(lines: list[str], n_bits: int) -> np.ndarray:
    if n_bits <= 62:
        return codes_to_bits(np.array([int(s, 16) for s in lines], dtype=np.int64), n_bits)
    out = np.zeros((len(lines), n_bits), dtype=np.uint8)
    for i, s in enumerate(lines):
        c = int(s, 16)
        for j in range(n_bits):
            out[i, j] = c >> j & 1
    return out


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_batch(path, batch: SampleBatch, extra: dict | None = None) -> None:
    """One hex-encoded configuration per line plus ``<path>.json`` provenance.

    Spin rows encode the non-ghost spins, bit ``v`` set for +1. Joint batches
    also write their spins to ``<path>.spins``.
    """
    bits = _row_bits(batch)
    Path(path).write_text("".join(s + "\n" for s in _encode(bits)))
    meta = dict(batch.provenance)
    meta["n_bits"] = int(bits.shape[1])
    meta["has_spins"] = batch.spins is not None
    if extra:
        meta.update(extra)
    if batch.spins is not None:
        spins = (batch.spins[:, list(batch.graph.real_vertices)] > 0).astype(np.uint8)
        Path(str(path) + ".spins").write_text("".join(s + "\n" for s in _encode(spins)))
    write_json(sidecar_path(path), meta)


def _spins_from_bits(bits: np.ndarray, g: Graph) -> np.ndarray:
    s = (2 * bits.astype(np.int8) - 1).astype(np.int8)
    if g.ghost is not None:
        s = np.hstack([s, np.ones((len(s), 1), dtype=np.int8)])
    return s


def read_batch(path, graph: Graph) -> SampleBatch:
    meta = read_json(sidecar_path(path))
    if meta["graph"] != graph.key:
        raise GraphError("batch was sampled on a different graph")
    lines = Path(path).read_text().split()
    bits = _decode(lines, meta["n_bits"])
    model = ModelSpec.from_json(meta["model"]) if meta.get("model") else None
    chain = ChainConfig.from_json(meta["chain"]) if meta.get("chain") else None
    if meta["kind"] == "spin":
        return SampleBatch("spin", _spins_from_bits(bits, graph), graph, model, chain, meta["sampler"])
    spins = None
    if meta.get("has_spins"):
        sl = Path(str(path) + ".spins").read_text().split()
        spins = _spins_from_bits(_decode(sl, len(graph.real_vertices)), graph)
    return SampleBatch("edge", bits, graph, model, chain, meta["sampler"], spins)
