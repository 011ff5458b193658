"""Run the randomized acceptance criteria over many seeds.

    python3 scripts/stress_acceptance.py --seeds 20
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import test_acceptance as acc  # noqa: E402

RANDOMIZED = {
    4: acc.criterion_4,
    5: acc.criterion_5,
    6: acc.criterion_6,
    7: acc.criterion_7,
    8: acc.criterion_8,
    9: acc.criterion_9,
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--first", type=int, default=100)
    ap.add_argument("--criteria", default=",".join(map(str, RANDOMIZED)))
    args = ap.parse_args()
    failures = 0
    for k in (int(c) for c in args.criteria.split(",")):
        for seed in range(args.first, args.first + args.seeds):
            ok, detail = RANDOMIZED[k](seed=seed)
            if not ok:
                failures += 1
                print(f"criterion {k} seed {seed}: FAIL {detail}", flush=True)
        print(f"criterion {k}: {args.seeds} seeds done", flush=True)
    print(f"{failures} failing runs")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
