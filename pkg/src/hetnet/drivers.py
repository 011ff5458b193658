"""Minimal driver-node search."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .analyzers import Verdict, check_theorem1
from .graph import from_adjacency, reachable_from
from .model import DEFAULT_TOL, NetworkSpec, ToleranceConfig, build_lifted, require_valid
from .numerics import pbh_analysis

EXHAUSTIVE_LIMIT = 12


@dataclass(frozen=True)
class DriverSearchResult:
    """``minimal_sets`` hold 0-based node indices; ``cardinality`` is ``None`` when even full actuation fails."""

    minimal_sets: tuple[tuple[int, ...], ...]
    cardinality: int | None
    exhaustive: bool
    evaluated: int = 0


def _delta(N: int, chosen) -> np.ndarray:
    d = np.zeros(N, dtype=int)
    d[list(chosen)] = 1
    return d


def _controllable(spec: NetworkSpec, chosen, tol: ToleranceConfig) -> bool:
    return check_theorem1(spec.with_delta(_delta(spec.N, chosen)), tol).verdict is Verdict.CONTROLLABLE


def _exhaustive(spec: NetworkSpec, tol: ToleranceConfig) -> DriverSearchResult:
    N = spec.N
    topo = from_adjacency(spec.W)
    everyone = set(range(N))
    evaluated = 0
    for k in range(N + 1):
        found = []
        for combo in combinations(range(N), k):
            # nodes unreachable from the drivers evolve autonomously
            if reachable_from(topo, combo) != everyone:
                continue
            evaluated += 1
            if _controllable(spec, combo, tol):
                found.append(combo)
        if found:
            return DriverSearchResult(tuple(found), k, True, evaluated)
    return DriverSearchResult((), None, True, evaluated)


def _deficiency(spec: NetworkSpec, chosen, tol: ToleranceConfig) -> int:
    lifted = build_lifted(spec.with_delta(_delta(spec.N, chosen)))
    return pbh_analysis(lifted.Phi, lifted.Psi, tol).total_deficiency


def _greedy(spec: NetworkSpec, tol: ToleranceConfig) -> DriverSearchResult:
    chosen: list[int] = []
    evaluated = 0
    current = _deficiency(spec, chosen, tol)
    while current > 0 and len(chosen) < spec.N:
        best, best_def = None, None
        for c in range(spec.N):
            if c in chosen:
                continue
            evaluated += 1
            d = _deficiency(spec, sorted(chosen + [c]), tol)
            if best_def is None or d < best_def:
                best, best_def = c, d
        chosen.append(best)
        current = best_def
    chosen.sort()
    if current > 0:
        return DriverSearchResult((), None, False, evaluated)
    return DriverSearchResult((tuple(chosen),), len(chosen), False, evaluated)


def minimal_drivers(spec: NetworkSpec, mode: str = "exhaustive", limit: int = EXHAUSTIVE_LIMIT,
                    tol: ToleranceConfig = DEFAULT_TOL) -> DriverSearchResult:
    """Smallest driver sets making the network controllable; ``spec.delta`` is ignored.

    ``exhaustive`` enumerates subsets by size and returns every minimum one;
    ``greedy`` adds the node that most reduces the summed PBH deficiency (ties
    to the lowest index) and makes no optimality claim.
    """
    require_valid(spec)
    if mode == "exhaustive":
        if spec.N > limit:
            raise ValueError(
                f"exhaustive search over {spec.N} nodes exceeds the limit of {limit}; "
                "use mode='greedy' or raise the limit"
            )
        return _exhaustive(spec, tol)
    if mode == "greedy":
        return _greedy(spec, tol)
    raise ValueError(f"unknown search mode {mode!r}; use 'exhaustive' or 'greedy'")
