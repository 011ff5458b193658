"""Acceptance suite: ten criteria, one PASS/FAIL line each.

Run under pytest (lines are printed live) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import contextlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from generators import (  # noqa: E402
    random_chain_corollary_spec,
    random_diagonalizable_spec,
    random_general_spec,
    random_pair,
    random_structured_spec,
)
from oracles import exact_controllable, exact_rank  # noqa: E402

from hetnet.analyzers import (  # noqa: E402
    Verdict,
    check_chain_corollary1,
    check_observability_theorem3,
    check_rowrank_theorem2,
    check_source_corollary2,
    check_theorem1,
    check_topology,
    check_topology_necessity_theorem4,
)
from hetnet.cli import main  # noqa: E402
from hetnet.examples import (  # noqa: E402
    example1_heterogeneous,
    example1_homogeneous,
    example2_heterogeneous,
    example2_homogeneous,
)
from hetnet.model import build_lifted  # noqa: E402
from hetnet.numerics import kalman_controllable, observable, pbh_controllable, rank_of  # noqa: E402
from hetnet.structured import (  # noqa: E402
    build_structured_lifted,
    check_diagonalizable,
    check_theorem5,
)

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "golden"
EXPECTED_EXIT = {"example1_homo": 0, "example1_hetero": 1, "example2_homo": 1, "example2_hetero": 0}

CONTROLLABLE = Verdict.CONTROLLABLE


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1():
    def run():
        spec = example1_homogeneous()
        lifted = build_lifted(spec)
        return check_theorem1(spec).verdict, kalman_controllable(lifted.Phi, lifted.Psi)[0], lifted.Phi.shape
    (verdict, kalman, shape), secs = _timed(run)
    ok = verdict is CONTROLLABLE and kalman and shape == (6, 6) and secs < 1.0
    return ok, f"theorem1={verdict.value} kalman={kalman} lifted={shape} time={secs:.3f}s"


def criterion_2():
    def run():
        spec = example1_heterogeneous()
        lifted = build_lifted(spec)
        rep = check_theorem1(spec)
        res = rep.witness.residuals(lifted.Phi, lifted.Psi) if rep.witness is not None else (np.inf, np.inf)
        return rep.verdict, max(res)
    (verdict, resid), secs = _timed(run)
    ok = verdict is Verdict.UNCONTROLLABLE and resid < 1e-8 and secs < 1.0
    return ok, f"theorem1={verdict.value} witness residual={resid:.2e} time={secs:.3f}s"


def criterion_3():
    def run():
        hetero = example2_heterogeneous()
        homo = example2_homogeneous()
        return (
            check_topology(hetero).verdict,
            check_topology_necessity_theorem4(homo).verdict,
            check_theorem1(homo).verdict,
            check_theorem1(hetero).verdict,
        )
    (topo, thm4, homo1, hetero1), secs = _timed(run)
    ok = (topo is Verdict.UNCONTROLLABLE and thm4 is Verdict.UNCONTROLLABLE and homo1 is Verdict.UNCONTROLLABLE
          and hetero1 is CONTROLLABLE and secs < 1.0)
    return ok, (f"(W,Delta)={topo.value} homogeneous via theorem4={thm4.value} (theorem1 {homo1.value}) "
                f"heterogeneous={hetero1.value} time={secs:.3f}s")


def criterion_4(samples: int = 220, seed: int = 4):
    rng = np.random.default_rng(seed)
    bad, positives = [], 0
    for k in range(samples):
        spec = random_general_spec(rng)
        lifted = build_lifted(spec)
        verdict = check_theorem1(spec).verdict is CONTROLLABLE
        direct = pbh_controllable(lifted.Phi, lifted.Psi)[0]
        exact = exact_controllable(lifted.Phi, lifted.Psi)
        positives += exact
        if not verdict == direct == exact:
            bad.append(k)
    return not bad, f"{samples} specs, {positives} controllable, mismatches={bad[:5]}"


def criterion_5(samples: int = 220, seed: int = 5):
    rng = np.random.default_rng(seed)
    bad, positives = [], 0
    for k in range(samples):
        spec = random_structured_spec(rng)
        assert len(spec.driven) < spec.N
        lifted = build_structured_lifted(spec)
        verdict = check_theorem5(spec).verdict is CONTROLLABLE
        direct = pbh_controllable(lifted.Phi, lifted.Psi)[0]
        exact = exact_controllable(lifted.Phi, lifted.Psi)
        positives += exact
        if not verdict == direct == exact:
            bad.append(k)
    return not bad, f"{samples} specs, {positives} controllable, mismatches={bad[:5]}"


def criterion_6(samples: int = 120, seed: int = 6):
    rng = np.random.default_rng(seed)
    bad, positives, skipped = [], 0, 0
    for k in range(samples):
        spec = random_diagonalizable_spec(rng)
        rep = check_diagonalizable(spec)
        if rep.verdict is Verdict.NOT_APPLICABLE:
            skipped += 1
            bad.append(k)
            continue
        lifted = build_structured_lifted(spec)
        direct = pbh_controllable(lifted.Phi, lifted.Psi)[0]
        exact = exact_controllable(lifted.Phi, lifted.Psi)
        positives += exact
        if not (rep.verdict is CONTROLLABLE) == direct == exact:
            bad.append(k)
    return not bad, f"{samples} specs, {positives} controllable, not applicable={skipped}, mismatches={bad[:5]}"


def criterion_7(samples: int = 60, seed: int = 7):
    rng = np.random.default_rng(seed)
    bad, roots = [], 0
    for k in range(samples):
        spec = random_chain_corollary_spec(rng)
        rep = check_chain_corollary1(spec)
        root_only = bool(spec.delta[0] == 1 and spec.delta.sum() == 1)
        roots += root_only
        lifted = build_lifted(spec)
        direct = pbh_controllable(lifted.Phi, lifted.Psi)[0]
        if rep.verdict is Verdict.NOT_APPLICABLE or (rep.verdict is CONTROLLABLE) != root_only or root_only != direct:
            bad.append(k)
    return not bad, f"{samples} chains, {roots} with delta = e_1, mismatches={bad[:5]}"


NECESSITY = {
    "corollary2": check_source_corollary2,
    "theorem2": check_rowrank_theorem2,
    "theorem3": check_observability_theorem3,
    "theorem4": check_topology_necessity_theorem4,
}


def criterion_8(samples: int = 220, seed: int = 8):
    rng = np.random.default_rng(seed)
    counterexamples, positives, applied = [], 0, 0
    for k in range(samples):
        spec = random_general_spec(rng, drive_prob=0.6)
        if check_theorem1(spec).verdict is not CONTROLLABLE:
            continue
        positives += 1
        for name, check in NECESSITY.items():
            v = check(spec).verdict
            if v is not Verdict.NOT_APPLICABLE:
                applied += 1
            if v in (Verdict.UNCONTROLLABLE, Verdict.NECESSARY_FAILED):
                counterexamples.append((k, name))
    ok = not counterexamples and positives >= 30
    return ok, f"{samples} specs, {positives} controllable, {applied} applicable checks, counterexamples={counterexamples[:5]}"


def _observability_matrix(A, C):
    n = A.shape[0]
    blocks, cur = [], C
    for _ in range(n):
        blocks.append(cur)
        cur = cur @ A
    return np.vstack(blocks)


def criterion_9(seed: int = 9):
    rng = np.random.default_rng(seed)
    kal_bad = 0
    for _ in range(520):
        A, B = random_pair(rng)
        kal = kalman_controllable(A, B)[0]
        pbh = pbh_controllable(A, B)[0]
        kal_bad += not (kal == pbh == exact_controllable(A, B))
    dual_bad = 0
    for _ in range(220):
        A, B = random_pair(rng)
        C = B.T
        obs = observable(A, C)
        by_dual = kalman_controllable(A.T, C.T)[0]
        exact = exact_rank(_observability_matrix(A, C)) == A.shape[0]
        dual_bad += not (obs == by_dual == exact)
    rank_bad = 0
    for _ in range(120):
        r, c = rng.integers(1, 8, 2)
        M = rng.integers(-4, 5, (r, c)).astype(float)
        if rng.random() < 0.5 and r > 1:
            # force a dependent row
            M[-1] = M[0] * rng.integers(-2, 3) + (M[1] if r > 2 else 0)
        rank_bad += rank_of(M).rank != exact_rank(M)
    ok = kal_bad == dual_bad == rank_bad == 0
    return ok, f"kalman/pbh 520 pairs bad={kal_bad}; duality 220 pairs bad={dual_bad}; rank 120 matrices bad={rank_bad}"


@contextlib.contextmanager
def _cwd(path):
    old = os.getcwd()
    os.chdir(path)
    try:
        yield
    finally:
        os.chdir(old)


def _run_cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def criterion_10():
    """Exit codes and byte-identical --json reports (timing removed), run from the repo root."""
    problems = []
    with _cwd(ROOT):
        for name, expected in EXPECTED_EXIT.items():
            runs = []
            for _ in range(2):
                code, out = _run_cli(["check", f"golden/{name}.net", "--json"])
                doc = json.loads(out)
                doc.pop("timing")
                runs.append((code, json.dumps(doc, indent=2) + "\n"))
            want = (GOLDEN / f"{name}.report.json").read_text(encoding="utf-8")
            if runs[0][0] != expected:
                problems.append(f"{name}: exit {runs[0][0]} != {expected}")
            if runs[0][1] != want:
                problems.append(f"{name}: report differs from golden")
            if runs[0] != runs[1]:
                problems.append(f"{name}: repeated run differs")
    return not problems, "; ".join(problems) or "4 golden files: exit codes and reports match"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _report(k: int, ok: bool, detail: str) -> str:
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + _report(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    t0 = time.perf_counter()
    results = []
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        results.append(ok)
        print(_report(k, ok, detail), flush=True)
    print(f"{sum(results)}/{len(results)} criteria passed in {time.perf_counter() - t0:.1f}s")
    sys.exit(0 if all(results) else 1)
