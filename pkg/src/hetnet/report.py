"""Running criteria over a network document and rendering the results."""

from __future__ import annotations

import json
from dataclasses import fields
from typing import Any

import numpy as np

from .analyzers import GENERAL_CHECKS, ControllabilityReport, Verdict
from .model import ToleranceConfig, build_lifted
from .netfile import NetworkDocument
from .numerics import EXACT_MAX_DIM, KALMAN_MAX_DIM, PBHWitness, exact_controllable_dim, kalman_controllable, pbh_analysis
from .structured import STRUCTURED_CHECKS, build_structured_lifted

SCHEMA_VERSION = "1.0"

EXIT_CONTROLLABLE = 0
EXIT_UNCONTROLLABLE = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3
EXIT_NUMERICAL = 4

TITLES = {
    "theorem1": "block-equation PBH test (necessary and sufficient)",
    "kalman": "Kalman rank of the lifted pair (cross-check)",
    "topology": "topology controllability of (W, Delta)",
    "corollary1": "directed chain with shift-structured nodes",
    "corollary2": "node without incoming edges (necessary)",
    "theorem2": "row rank of undriven node rows (necessary)",
    "theorem3": "observability under similar dynamics (necessary)",
    "theorem4": "topology necessity under matching dynamics",
    "theorem5": "companion nodes, four-condition test (necessary and sufficient)",
    "corollary3": "companion nodes, structured sufficiency",
    "diagonalizable": "companion nodes, diagonalizable W",
}

CRITERIA = tuple(TITLES)


def check_kalman(spec, tol: ToleranceConfig, max_dim: int = KALMAN_MAX_DIM) -> ControllabilityReport:
    """Kalman rank of the lifted pair, reported as a cross-check.

    The controllability matrix is often too ill-conditioned to carry a
    verdict of its own. When it disagrees with the PBH route the exact
    reachable dimension arbitrates; only if that sides with Kalman does the
    report join the network-scope verdicts (and so produce a conflict).
    """
    lifted = build_lifted(spec)
    dim = lifted.Phi.shape[0]
    if dim > max_dim:
        return ControllabilityReport(Verdict.NOT_APPLICABLE, "kalman", scope="crosscheck",
                                     notes=(f"lifted dimension {dim} exceeds the Kalman limit {max_dim}",))
    ok, res = kalman_controllable(lifted.Phi, lifted.Psi, tol, max_dim=max_dim)
    notes = [f"rank {res.rank} of {dim}"]
    scope = "crosscheck"
    pbh = pbh_analysis(lifted.Phi, lifted.Psi, tol)
    if pbh.controllable != ok:
        if dim <= EXACT_MAX_DIM:
            exact = exact_controllable_dim(lifted.Phi, lifted.Psi)
            notes.append(f"disagrees with the PBH route; exact reachable dimension is {exact}")
            if (exact == dim) == ok:
                scope = "network"
        else:
            notes.append("disagrees with the PBH route")
    return ControllabilityReport(Verdict.CONTROLLABLE if ok else Verdict.UNCONTROLLABLE, "kalman",
                                 notes=tuple(notes), scope=scope)


def available_criteria(doc: NetworkDocument) -> list[str]:
    names = ["theorem1", "kalman", *[k for k in GENERAL_CHECKS if k != "theorem1"]]
    if doc.structured:
        names += list(STRUCTURED_CHECKS)
    return names


def run_criteria(doc: NetworkDocument, criteria: list[str] | None = None,
                 tol: ToleranceConfig | None = None, kalman_max_dim: int = KALMAN_MAX_DIM) -> list[ControllabilityReport]:
    tol = tol or doc.tolerances
    wanted = available_criteria(doc) if not criteria or criteria == ["all"] else criteria
    general = doc.general()
    out = []
    for name in wanted:
        if name == "kalman":
            out.append(check_kalman(general, tol, kalman_max_dim))
        elif name in GENERAL_CHECKS:
            out.append(GENERAL_CHECKS[name](general, tol))
        elif name in STRUCTURED_CHECKS:
            if not doc.structured:
                out.append(ControllabilityReport(Verdict.NOT_APPLICABLE, name,
                                                 notes=("requires companion-form nodes",)))
            else:
                out.append(STRUCTURED_CHECKS[name](doc.spec, tol))
        else:
            raise ValueError(f"unknown criterion {name!r}; choose from {', '.join(CRITERIA)} or all")
    return out


def exit_code(reports: list[ControllabilityReport]) -> int:
    """0 controllable, 1 uncontrollable, 2 inconclusive, 4 when decided verdicts contradict each other."""
    net = [r for r in reports if r.scope == "network"]
    negative = any(r.verdict in (Verdict.UNCONTROLLABLE, Verdict.NECESSARY_FAILED) for r in net)
    positive = any(r.verdict is Verdict.CONTROLLABLE for r in net)
    if negative and positive:
        return EXIT_NUMERICAL
    if negative:
        return EXIT_UNCONTROLLABLE
    if positive:
        return EXIT_CONTROLLABLE
    return EXIT_INCONCLUSIVE


def summary_verdict(code: int) -> str:
    return {
        EXIT_CONTROLLABLE: Verdict.CONTROLLABLE.value,
        EXIT_UNCONTROLLABLE: Verdict.UNCONTROLLABLE.value,
        EXIT_INCONCLUSIVE: "Inconclusive",
        EXIT_NUMERICAL: "Conflict",
    }[code]


# ---------------------------------------------------------------------------
# JSON document
# ---------------------------------------------------------------------------

def clean(x: float, digits: int = 10) -> float:
    """Round for byte-stable output; rounding noise below ``1e-12`` becomes 0."""
    x = float(x)
    if abs(x) < 1e-12:
        return 0.0
    return round(x, digits)


def complex_json(z: complex) -> dict:
    z = complex(z)
    return {"re": clean(z.real), "im": clean(z.imag)}


def witness_json(w: PBHWitness | None, lifted=None) -> dict | None:
    if w is None:
        return None
    v = np.asarray(w.left_vector, dtype=complex)
    out = {"s0": complex_json(w.s0), "vector": [complex_json(z) for z in v], "deficiency": int(w.deficiency)}
    if lifted is not None and v.size == lifted.Phi.shape[0]:
        r1, r2 = w.residuals(lifted.Phi, lifted.Psi)
        out["residual"] = clean(max(r1, r2), 6)
    return out


def report_json(r: ControllabilityReport, lifted=None) -> dict:
    return {
        "criterion": r.criterion,
        "title": TITLES.get(r.criterion, r.criterion),
        "scope": r.scope,
        "verdict": r.verdict.value,
        "failed_condition": r.failed_condition,
        "nodes": [k + 1 for k in r.nodes],
        "notes": list(r.notes),
        "witness": witness_json(r.witness, lifted),
    }


def tolerances_json(tol: ToleranceConfig) -> dict:
    return {f.name: getattr(tol, f.name) for f in fields(ToleranceConfig)}


def check_document(doc: NetworkDocument, reports: list[ControllabilityReport], tol: ToleranceConfig,
                   source: str, seconds: float) -> dict:
    spec = doc.spec
    lifted = build_structured_lifted(spec) if doc.structured else build_lifted(spec)
    code = exit_code(reports)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "check",
        "source": source,
        "network": {
            "name": doc.name,
            "kind": "companion" if doc.structured else "general",
            "N": spec.N,
            "n": spec.n,
            "p": lifted.block_dims[2],
            "m": 1 if doc.structured else spec.m,
            "driven": [k + 1 for k in spec.driven],
        },
        "tolerances": tolerances_json(tol),
        "reports": [report_json(r, lifted) for r in reports],
        "summary": {"verdict": summary_verdict(code), "exit_code": code},
        "timing": {"seconds": round(seconds, 6)},
    }


def drivers_document(doc: NetworkDocument, result, mode: str, tol: ToleranceConfig, source: str,
                     verified: bool, seconds: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "drivers",
        "source": source,
        "mode": mode,
        "exhaustive": result.exhaustive,
        "cardinality": result.cardinality,
        "minimal_sets": [[k + 1 for k in s] for s in result.minimal_sets],
        "verified": verified,
        "tolerances": tolerances_json(tol),
        "timing": {"seconds": round(seconds, 6)},
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


_COMPLEX = {
    "type": "object",
    "required": ["re", "im"],
    "additionalProperties": False,
    "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
}

_TOL = {
    "type": "object",
    "required": [f.name for f in fields(ToleranceConfig)],
    "additionalProperties": False,
    "properties": {f.name: {"type": "number", "exclusiveMinimum": 0} for f in fields(ToleranceConfig)},
}

_TIMING = {"type": "object", "required": ["seconds"], "properties": {"seconds": {"type": "number", "minimum": 0}}}

REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hetnet report",
    "type": "object",
    "required": ["schema_version", "command", "source", "tolerances", "timing"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["check", "drivers"]},
        "source": {"type": "string"},
        "tolerances": _TOL,
        "timing": _TIMING,
    },
    "oneOf": [
        {
            "properties": {
                "command": {"const": "check"},
                "network": {
                    "type": "object",
                    "required": ["name", "kind", "N", "n", "p", "m", "driven"],
                    "additionalProperties": False,
                    "properties": {
                        "name": {"type": "string"},
                        "kind": {"enum": ["general", "companion"]},
                        "N": {"type": "integer", "minimum": 1},
                        "n": {"type": "integer", "minimum": 1},
                        "p": {"type": "integer", "minimum": 1},
                        "m": {"type": "integer", "minimum": 1},
                        "driven": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                    },
                },
                "reports": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["criterion", "title", "scope", "verdict", "failed_condition", "nodes", "notes", "witness"],
                        "additionalProperties": False,
                        "properties": {
                            "criterion": {"enum": list(CRITERIA)},
                            "title": {"type": "string"},
                            "scope": {"enum": ["network", "topology", "crosscheck"]},
                            "verdict": {"enum": [v.value for v in Verdict]},
                            "failed_condition": {"type": ["integer", "null"]},
                            "nodes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                            "notes": {"type": "array", "items": {"type": "string"}},
                            "witness": {
                                "oneOf": [
                                    {"type": "null"},
                                    {
                                        "type": "object",
                                        "required": ["s0", "vector", "deficiency"],
                                        "additionalProperties": False,
                                        "properties": {
                                            "s0": _COMPLEX,
                                            "vector": {"type": "array", "items": _COMPLEX, "minItems": 1},
                                            "deficiency": {"type": "integer", "minimum": 1},
                                            "residual": {"type": "number", "minimum": 0},
                                        },
                                    },
                                ]
                            },
                        },
                    },
                },
                "summary": {
                    "type": "object",
                    "required": ["verdict", "exit_code"],
                    "additionalProperties": False,
                    "properties": {
                        "verdict": {"enum": ["Controllable", "Uncontrollable", "Inconclusive", "Conflict"]},
                        "exit_code": {"enum": [0, 1, 2, 4]},
                    },
                },
            },
            "required": ["network", "reports", "summary"],
        },
        {
            "properties": {
                "command": {"const": "drivers"},
                "mode": {"enum": ["exhaustive", "greedy"]},
                "exhaustive": {"type": "boolean"},
                "cardinality": {"type": ["integer", "null"], "minimum": 0},
                "minimal_sets": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 1}}},
                "verified": {"type": "boolean"},
            },
            "required": ["mode", "exhaustive", "cardinality", "minimal_sets", "verified"],
        },
    ],
}


def render_table(doc_json: dict) -> str:
    lines = []
    net = doc_json["network"]
    head = f"{doc_json['source']}: N={net['N']} n={net['n']} p={net['p']} m={net['m']} driven={net['driven']}"
    lines.append(head)
    width = max(len(r["criterion"]) for r in doc_json["reports"]) if doc_json["reports"] else 8
    for r in doc_json["reports"]:
        tag = f"[{r['scope']}]" if r["scope"] != "network" else ""
        lines.append(f"  {r['criterion']:<{width}}  {r['verdict']:<25} {tag}".rstrip())
        for note in r["notes"]:
            lines.append(f"  {'':<{width}}    {note}")
        w = r["witness"]
        if w is not None:
            s0 = w["s0"]
            vec = ", ".join(f"{z['re']:.4g}{z['im']:+.4g}j" if z["im"] else f"{z['re']:.4g}" for z in w["vector"])
            lines.append(f"  {'':<{width}}    witness s0 = {s0['re']:.6g}{s0['im']:+.6g}j, alpha = [{vec}]")
    lines.append(f"verdict: {doc_json['summary']['verdict']} (exit {doc_json['summary']['exit_code']})")
    return "\n".join(lines) + "\n"
