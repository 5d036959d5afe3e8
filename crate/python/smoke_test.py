#!/usr/bin/env python3
"""Smoke test for the domcert_py extension module.

Builds nothing itself: run `cargo build -p domcert-py` first, then this
script locates the compiled library, imports it, and exercises the main
entry points end to end. Exits nonzero on the first failing check.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_library() -> Path:
    candidates = []
    for profile in ("debug", "release"):
        for name in ("libdomcert_py.so", "libdomcert_py.dylib", "domcert_py.dll"):
            p = REPO / "target" / profile / name
            if p.exists():
                candidates.append(p)
    if not candidates:
        sys.exit("no built extension found; run `cargo build -p domcert-py` first")
    return max(candidates, key=lambda p: p.stat().st_mtime)


def import_module(lib: Path):
    stage = Path(tempfile.mkdtemp(prefix="domcert_py_"))
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy2(lib, stage / f"domcert_py{suffix}")
    sys.path.insert(0, str(stage))
    import domcert_py

    return domcert_py


CHECKS = 0


def check(cond: bool, label: str) -> None:
    global CHECKS
    CHECKS += 1
    if not cond:
        sys.exit(f"FAIL: {label}")
    print(f"ok: {label}")


def main() -> None:
    dc = import_module(locate_library())

    g = dc.c6_plus()
    check(g.n == 7 and g.edge_count == 9, "hub hexagon has 7 vertices and 9 edges")

    report = json.loads(dc.screen(g))
    check(report["pass"], "hub hexagon passes screening")
    p4 = dc.path(4)
    check(not json.loads(dc.screen(p4))["pass"], "P4 fails screening")

    cert_json = dc.certify(g)
    cert = json.loads(cert_json)
    check(cert["layers"] == [[0, 1, 3, 4, 6, 7], [2, 5, 8]], "certificate layers")
    check(cert["graph_sha"] == g.sha256(), "certificate is bound to the graph hash")
    verdict = json.loads(dc.verify(g, cert_json))
    check(verdict["pass"] and verdict["sound"], "certificate verifies soundly")

    value, exact = dc.density(dc.path(2), dc.StepGraphon.two_block(0.5))
    check(abs(value - 0.5) < 1e-12 and exact == "1/2", "edge density of the even split")
    value, exact = dc.density(dc.path(3), dc.StepGraphon.identity_blocks(3))
    check(exact == "1/9", "P3 density in uniform identity blocks")
    check(dc.hom_count(dc.path(2), dc.Graph(3, [(0, 1), (0, 2), (1, 2)])) == "6",
          "hom(K2, K3) = 6")

    cx_json = dc.falsify(dc.path(4), dc.star(2))
    check(cx_json is not None, "falsifier finds the (P4, 2-star) violation")
    cx = json.loads(cx_json)
    check(cx["margin"] < -1e-6, "violation margin is negative")
    check(cx["lhs_exact"] == "9/128" and cx["rhs_exact"] == "3/16",
          "violation densities confirmed exactly")
    check(dc.falsify(g, dc.even_cycle(6), restarts=2, iters=10) is None,
          "no violation against the certified hub hexagon")

    check(dc.hypercube_ball(3, 2).is_isomorphic(g), "radius-2 ball of Q3 is the hub hexagon")
    margin = dc.domination_margin(g, dc.even_cycle(6), dc.StepGraphon.two_block(0.25))
    check(margin >= 0.0, "sampled margin is nonnegative")

    code, out, errtext = dc.run_cli(["bogus-subcommand"])
    check(code == 2 and out == "", "CLI rejects an unknown subcommand with exit 2")
    code, out, errtext = dc.run_cli(["construct", "c6-plus"])
    check(code == 0 and json.loads(out)["n"] == 7, "CLI constructs the hub hexagon")

    print(f"all {CHECKS} smoke checks passed")


if __name__ == "__main__":
    main()
