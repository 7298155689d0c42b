"""JSON / CSV readers and writers for graphs, forms, operators and reports."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .dtn import DtNOperator
from .graph import Graph, GraphError, GraphWithBoundary, WeightSpec
from .lattice import ADJACENCIES, LatticeSpec
from .spectral import SpectralReport


class InputError(ValueError):
    """Malformed input; the message names the offending field."""


@dataclass
class GraphInput:
    graph: Graph
    spec: WeightSpec
    interior: list[int] | None

    def with_boundary(self) -> GraphWithBoundary:
        if self.interior is None:
            raise InputError("field 'interior' is required for this command")
        return GraphWithBoundary.from_interior(self.graph, self.interior, self.spec)


def _field(data: dict, name: str, kind=None, required: bool = True):
    if name not in data:
        if required:
            raise InputError(f"missing field '{name}'")
        return None
    val = data[name]
    if kind is not None and not isinstance(val, kind):
        raise InputError(f"field '{name}' has the wrong type ({type(val).__name__})")
    return val


def _int(x, name: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InputError(f"field '{name}' must contain integers, got {x!r}")
    return x


def load_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def parse_graph(data: Any) -> GraphInput:
    if not isinstance(data, dict):
        raise InputError("graph input must be a JSON object")
    vertices = [_int(v, "vertices") for v in _field(data, "vertices", list)]
    raw_edges = _field(data, "edges", list)
    edges = []
    weights = {}
    for e in raw_edges:
        if not isinstance(e, list) or len(e) not in (2, 3):
            raise InputError(f"field 'edges' entries must be [u, v] or [u, v, weight], got {e!r}")
        u, v = _int(e[0], "edges"), _int(e[1], "edges")
        edges.append((u, v))
        if len(e) == 3:
            if not isinstance(e[2], (int, float)) or isinstance(e[2], bool):
                raise InputError(f"field 'edges' weight for [{u}, {v}] must be a number")
            weights[(min(u, v), max(u, v))] = float(e[2])
    mode = _field(data, "weight_mode", str, required=False) or "unit"
    try:
        graph = Graph.from_edges(vertices, edges)
        edge_weights = None
        if mode == "normalized":
            edge_weights = {e: weights.get(e, 1.0) for e in graph.edges}
        clique_weights = None
        raw_cw = _field(data, "clique_weights", list, required=False)
        if raw_cw is not None:
            clique_weights = {}
            for item in raw_cw:
                if not isinstance(item, list) or len(item) != 2 or not isinstance(item[0], list):
                    raise InputError(f"field 'clique_weights' entries must be [[verts], w], got {item!r}")
                key = tuple(sorted(_int(v, "clique_weights") for v in item[0]))
                clique_weights[key] = float(item[1])
        elif mode == "explicit" and weights:
            clique_weights = dict(weights)
        spec = WeightSpec(mode, edge_weights, clique_weights)
    except GraphError as exc:
        raise InputError(str(exc)) from None
    interior = _field(data, "interior", list, required=False)
    if interior is not None:
        interior = [_int(v, "interior") for v in interior]
    return GraphInput(graph, spec, interior)


def graph_to_json(graph: Graph, spec: WeightSpec | None = None, interior=None) -> dict:
    spec = WeightSpec() if spec is None else spec
    edges = []
    for u, v in sorted(graph.edges):
        if spec.mode == "normalized" and spec.edge_weights is not None:
            edges.append([u, v, spec.edge_weight(u, v)])
        else:
            edges.append([u, v])
    out: dict[str, Any] = {"vertices": list(graph.vertices), "edges": edges, "weight_mode": spec.mode}
    if interior is not None:
        out["interior"] = sorted(interior)
    if spec.clique_weights:
        out["clique_weights"] = [[list(c), w] for c, w in sorted(spec.clique_weights.items())]
    return out


def parse_adjacency_matrix(text: str) -> tuple[Graph, WeightSpec]:
    """Whitespace or comma separated square matrix; nonzero entries are edge weights."""
    rows = [r for r in (line.replace(",", " ").split() for line in text.splitlines()) if r]
    try:
        mat = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise InputError(f"adjacency matrix has a non-numeric entry: {exc}") from None
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputError("adjacency matrix must be square")
    if not np.allclose(mat, mat.T):
        raise InputError("adjacency matrix must be symmetric")
    if np.any(np.diag(mat) != 0):
        raise InputError(f"adjacency matrix has a loop at vertex {int(np.flatnonzero(np.diag(mat))[0])}")
    n = mat.shape[0]
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if mat[i, j] != 0]
    try:
        g = Graph.from_edges(range(n), edges)
        spec = WeightSpec("normalized", {(i, j): float(mat[i, j]) for i, j in edges})
    except GraphError as exc:
        raise InputError(str(exc)) from None
    return g, spec


def parse_omega(data: Any, n: int | None = None, adjacency: str | None = None) -> LatticeSpec:
    """``{"n": int, "adjacency": ..., "omega": [[..], ..]}`` or a bare list of points."""
    if isinstance(data, list):
        points = data
        data = {}
    elif isinstance(data, dict):
        points = _field(data, "omega", list)
    else:
        raise InputError("omega input must be a JSON object or list")
    n = data.get("n", n)
    adjacency = data.get("adjacency", adjacency)
    if n is None:
        raise InputError("missing field 'n'")
    if adjacency not in ADJACENCIES:
        raise InputError(f"field 'adjacency' must be one of {ADJACENCIES}, got {adjacency!r}")
    pts = []
    for p in points:
        if not isinstance(p, list):
            raise InputError(f"field 'omega' entries must be coordinate lists, got {p!r}")
        pts.append(tuple(_int(c, "omega") for c in p))
    try:
        return LatticeSpec.of(_int(n, "n"), adjacency, pts)
    except ValueError as exc:
        raise InputError(f"field 'omega': {exc}") from None


def omega_to_json(spec: LatticeSpec) -> dict:
    return {"n": spec.n, "adjacency": spec.adjacency, "omega": [list(p) for p in sorted(spec.omega)]}


def spectral_csv(report: SpectralReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "eigenvalue", "is_kernel"])
    for i, ev, ker in report.csv_rows():
        w.writerow([i, repr(ev), str(ker).lower()])
    return buf.getvalue()


def read_spectral_csv(text: str) -> SpectralReport:
    rows = list(csv.DictReader(io.StringIO(text)))
    ev = np.array([float(r["eigenvalue"]) for r in rows])
    ker = sum(r["is_kernel"] == "true" for r in rows)
    return SpectralReport(ev, ker, ev[ker:], float("nan"))


def dtn_csv(op: DtNOperator) -> str:
    """Dense matrix with basis cliques as row and column labels."""
    labels = [" ".join(str(v) for v in b) for b in op.basis]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["clique", *labels])
    for lab, row in zip(labels, op.matrix):
        w.writerow([lab, *(repr(float(x)) for x in row)])
    return buf.getvalue()


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def write_text(path: str | Path | None, text: str) -> None:
    if path is None or str(path) == "-":
        print(text, end="" if text.endswith("\n") else "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")
