"""Network file format (UTF-8 JSON).

Top-level sections::

    meta        {"N", "n", "p", "m"} plus optional "name", "description"
    nodes       list of {"label"?, "A", "B", "C"} or {"label"?, "companion": {"a", "C"}}
    H           n x m nested array
    edges       list of {"from", "to", "weight"}, 1-based, weight on edge from -> to
    delta       list of 0/1 (optional for the drivers command)
    tolerances  optional {"rank_factor", "eig_dedup_radius", "zero_vec_tol"}

Companion nodes must all share one output row ``C`` and imply ``p = m = 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Any

import numpy as np

from .graph import Edge, Topology, from_adjacency, to_adjacency
from .model import DEFAULT_TOL, NetworkSpec, NodeSystem, ToleranceConfig, validate
from .structured import CompanionNode, StructuredNetworkSpec, validate_structured

TOP_KEYS = {"meta", "nodes", "H", "edges", "delta", "tolerances"}
META_KEYS = {"N", "n", "p", "m", "name", "description"}
NODE_KEYS = {"label", "A", "B", "C"}
COMPANION_NODE_KEYS = {"label", "companion"}
COMPANION_KEYS = {"a", "C"}
EDGE_KEYS = {"from", "to", "weight"}
TOL_KEYS = {f.name for f in fields(ToleranceConfig)}


class NetworkFileError(ValueError):
    """Malformed network file; ``location`` names the offending field."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


@dataclass(frozen=True)
class NetworkDocument:
    spec: NetworkSpec | StructuredNetworkSpec
    tolerances: ToleranceConfig
    name: str = ""
    description: str = ""
    has_delta: bool = True

    @property
    def structured(self) -> bool:
        return isinstance(self.spec, StructuredNetworkSpec)

    def general(self) -> NetworkSpec:
        from .structured import as_network_spec

        return as_network_spec(self.spec) if self.structured else self.spec


def _check_keys(obj: Any, allowed: set[str], where: str, required: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise NetworkFileError(where, f"expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise NetworkFileError(where, f"unknown key(s) {', '.join(unknown)}")
    missing = sorted(required - set(obj))
    if missing:
        raise NetworkFileError(where, f"missing required key(s) {', '.join(missing)}")
    return obj


def _number(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise NetworkFileError(where, f"expected a number, got {x!r}")
    return float(x)


def _int(x: Any, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise NetworkFileError(where, f"expected an integer, got {x!r}")
    return x


def _matrix(x: Any, shape: tuple[int, int], where: str) -> np.ndarray:
    rows, cols = shape
    if not isinstance(x, list) or len(x) != rows:
        got = len(x) if isinstance(x, list) else type(x).__name__
        raise NetworkFileError(where, f"expected {rows} rows (shape {rows}x{cols} from meta), got {got}")
    out = np.zeros(shape)
    for i, row in enumerate(x):
        if not isinstance(row, list) or len(row) != cols:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise NetworkFileError(f"{where}[{i + 1}]", f"expected {cols} entries (shape {rows}x{cols} from meta), got {got}")
        for j, v in enumerate(row):
            out[i, j] = _number(v, f"{where}[{i + 1}][{j + 1}]")
    return out


def _vector(x: Any, length: int, where: str) -> np.ndarray:
    if not isinstance(x, list) or len(x) != length:
        got = len(x) if isinstance(x, list) else type(x).__name__
        raise NetworkFileError(where, f"expected {length} entries, got {got}")
    return np.array([_number(v, f"{where}[{k + 1}]") for k, v in enumerate(x)])


def parse_network(text: str, require_delta: bool = True) -> NetworkDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFileError(f"line {exc.lineno} column {exc.colno}", f"invalid JSON ({exc.msg})") from None
    required = {"meta", "nodes", "H", "edges"} | ({"delta"} if require_delta else set())
    _check_keys(doc, TOP_KEYS, "<document>", required)
    meta = _check_keys(doc["meta"], META_KEYS, "meta", {"N", "n", "p", "m"})
    N, n, p, m = (_int(meta[k], f"meta.{k}") for k in ("N", "n", "p", "m"))
    for k, v in (("N", N), ("n", n), ("p", p), ("m", m)):
        if v < 1:
            raise NetworkFileError(f"meta.{k}", f"must be at least 1, got {v}")
    for k in ("name", "description"):
        if k in meta and not isinstance(meta[k], str):
            raise NetworkFileError(f"meta.{k}", "must be a string")

    nodes = doc["nodes"]
    if not isinstance(nodes, list) or len(nodes) != N:
        got = len(nodes) if isinstance(nodes, list) else type(nodes).__name__
        raise NetworkFileError("nodes", f"expected {N} nodes (meta.N), got {got}")
    companion = [isinstance(nd, dict) and "companion" in nd for nd in nodes]
    if any(companion) and not all(companion):
        raise NetworkFileError("nodes", "companion and general nodes cannot be mixed")
    structured = bool(companion) and all(companion)

    labels = []
    for k, nd in enumerate(nodes):
        label = nd.get("label", str(k + 1)) if isinstance(nd, dict) else str(k + 1)
        if not isinstance(label, str):
            raise NetworkFileError(f"nodes[{k + 1}].label", "must be a string")
        labels.append(label)

    if "delta" in doc:
        raw = doc["delta"]
        if not isinstance(raw, list) or len(raw) != N:
            got = len(raw) if isinstance(raw, list) else type(raw).__name__
            raise NetworkFileError("delta", f"expected {N} entries, got {got}")
        for k, v in enumerate(raw):
            if _int(v, f"delta[{k + 1}]") not in (0, 1):
                raise NetworkFileError(f"delta[{k + 1}]", f"must be 0 or 1, got {v}")
        delta = np.array(raw, dtype=int)
    else:
        delta = np.zeros(N, dtype=int)

    if not isinstance(doc["edges"], list):
        raise NetworkFileError("edges", "expected a list")
    edges = []
    for k, e in enumerate(doc["edges"]):
        where = f"edges[{k + 1}]"
        _check_keys(e, EDGE_KEYS, where, EDGE_KEYS)
        src, dst = _int(e["from"], f"{where}.from"), _int(e["to"], f"{where}.to")
        for key, v in (("from", src), ("to", dst)):
            if not 1 <= v <= N:
                raise NetworkFileError(f"{where}.{key}", f"node index must lie in 1..{N}, got {v}")
        edges.append(Edge(src - 1, dst - 1, _number(e["weight"], f"{where}.weight")))
    try:
        W = to_adjacency(Topology(N, edges))
    except ValueError as exc:
        raise NetworkFileError("edges", str(exc)) from None

    tol = DEFAULT_TOL
    if "tolerances" in doc:
        tdoc = _check_keys(doc["tolerances"], TOL_KEYS, "tolerances")
        try:
            tol = DEFAULT_TOL.with_overrides(**{k: _number(v, f"tolerances.{k}") for k, v in tdoc.items()})
        except ValueError as exc:
            raise NetworkFileError("tolerances", str(exc)) from None

    if structured:
        if p != 1 or m != 1:
            raise NetworkFileError("meta", "companion nodes require p = 1 and m = 1")
        H = _matrix(doc["H"], (n, 1), "H")
        cnodes, Cs = [], []
        for k, nd in enumerate(nodes):
            where = f"nodes[{k + 1}]"
            _check_keys(nd, COMPANION_NODE_KEYS, where, {"companion"})
            comp = _check_keys(nd["companion"], COMPANION_KEYS, f"{where}.companion", COMPANION_KEYS)
            cnodes.append(CompanionNode(_vector(comp["a"], n, f"{where}.companion.a"), label=labels[k]))
            Cs.append(_matrix(comp["C"], (1, n), f"{where}.companion.C"))
        for k, C in enumerate(Cs[1:], start=2):
            if not np.array_equal(C, Cs[0]):
                raise NetworkFileError(f"nodes[{k}].companion.C", "companion nodes must share one output row C")
        spec = StructuredNetworkSpec(tuple(cnodes), W, H, Cs[0], delta)
        violations = validate_structured(spec)
    else:
        H = _matrix(doc["H"], (n, m), "H")
        gnodes = []
        for k, nd in enumerate(nodes):
            where = f"nodes[{k + 1}]"
            _check_keys(nd, NODE_KEYS, where, {"A", "B", "C"})
            gnodes.append(NodeSystem(
                _matrix(nd["A"], (n, n), f"{where}.A"),
                _matrix(nd["B"], (n, p), f"{where}.B"),
                _matrix(nd["C"], (m, n), f"{where}.C"),
                label=labels[k],
            ))
        spec = NetworkSpec(tuple(gnodes), W, H, delta)
        violations = validate(spec)
    if violations:
        v = violations[0]
        raise NetworkFileError(v.field, v.rule)
    return NetworkDocument(spec, tol, meta.get("name", ""), meta.get("description", ""), "delta" in doc)


def _num(x: float):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def _rows(M: np.ndarray) -> list:
    return [[_num(v) for v in row] for row in np.atleast_2d(M)]


def _dump(obj: Any, indent: int = 0) -> str:
    """JSON with one matrix row per line; short flat lists stay inline."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(f'{pad}  {json.dumps(k)}: {_dump(v, indent + 1)}' for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return json.dumps(obj)
        if all(isinstance(v, list) and all(not isinstance(u, (dict, list)) for u in v) for v in obj):
            return "[" + ", ".join(json.dumps(v) for v in obj) + "]"
        inner = ",\n".join(f"{pad}  {_dump(v, indent + 1)}" for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    return json.dumps(obj)


def network_to_dict(spec: NetworkSpec | StructuredNetworkSpec, tol: ToleranceConfig | None = None,
                    name: str = "", description: str = "", include_delta: bool = True) -> dict:
    structured = isinstance(spec, StructuredNetworkSpec)
    meta: dict[str, Any] = {"N": spec.N, "n": spec.n, "p": 1 if structured else spec.p, "m": 1 if structured else spec.m}
    if name:
        meta["name"] = name
    if description:
        meta["description"] = description
    if structured:
        nodes = [{"label": nd.label, "companion": {"a": [_num(v) for v in nd.a], "C": _rows(spec.C)}} for nd in spec.nodes]
    else:
        nodes = [{"label": nd.label, "A": _rows(nd.A), "B": _rows(nd.B), "C": _rows(nd.C)} for nd in spec.nodes]
    out: dict[str, Any] = {"meta": meta, "nodes": nodes, "H": _rows(spec.H)}
    out["edges"] = [{"from": e.src + 1, "to": e.dst + 1, "weight": _num(e.weight)} for e in from_adjacency(spec.W).edges]
    if include_delta:
        out["delta"] = [int(v) for v in spec.delta]
    if tol is not None and tol != DEFAULT_TOL:
        out["tolerances"] = {f.name: getattr(tol, f.name) for f in fields(ToleranceConfig)}
    return out


def render_network(spec, tol: ToleranceConfig | None = None, name: str = "", description: str = "",
                   include_delta: bool = True) -> str:
    return _dump(network_to_dict(spec, tol, name, description, include_delta)) + "\n"


def read_network(path: str, require_delta: bool = True) -> NetworkDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise NetworkFileError(path, exc.strerror or str(exc)) from None
    return parse_network(text, require_delta=require_delta)
