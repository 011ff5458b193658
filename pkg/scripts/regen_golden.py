"""Rewrite golden/*.net and golden/*.report.json from the built-in examples."""

import json
import sys
from pathlib import Path

from hetnet.cli import main
from hetnet.examples import ALL
from hetnet.netfile import render_network

GOLDEN = Path(__file__).resolve().parent.parent / "golden"

DESCRIPTIONS = {
    "example1_homo": "three-node directed chain, identical nodes, only node 1 driven",
    "example1_hetero": "three-node directed chain, heterogeneous nodes, only node 1 driven",
    "example2_homo": "tree 1->2, 1->3 with every node copying node 1, only node 1 driven",
    "example2_hetero": "tree 1->2, 1->3 with heterogeneous nodes, only node 1 driven",
}


def strip_timing(doc: dict) -> dict:
    doc = dict(doc)
    doc.pop("timing", None)
    return doc


def regen() -> None:
    GOLDEN.mkdir(exist_ok=True)
    for name, build in ALL.items():
        net = GOLDEN / f"{name}.net"
        net.write_text(render_network(build(), name=name, description=DESCRIPTIONS[name]), encoding="utf-8")
    import contextlib
    import io
    import os

    cwd = os.getcwd()
    os.chdir(GOLDEN.parent)
    try:
        for name in ALL:
            buf = io.StringIO()
            with contextlib.redirect_stdout(buf):
                code = main(["check", f"golden/{name}.net", "--json"])
            doc = strip_timing(json.loads(buf.getvalue()))
            (GOLDEN / f"{name}.report.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
            print(f"{name}: exit {code}")
    finally:
        os.chdir(cwd)


if __name__ == "__main__":
    regen()
    sys.exit(0)
