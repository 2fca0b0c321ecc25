"""Smoke test for the plateau_py extension module.

Build and install it first, e.g.

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
"""

import json
import math
import sys
from pathlib import Path

import plateau_py as pp

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    kappa = pp.total_curvature_of(square)
    assert abs(kappa - 2 * math.pi) < 1e-12, kappa

    summary = json.loads(pp.solve(square, rings=8))
    assert 0.8 < summary["area"] <= 1.0, summary["area"]

    trefoil = json.loads((ROOT / "data/curves/trefoil6.json").read_text())["coords"]
    assert pp.total_curvature_of(trefoil) > 4 * math.pi
    assert pp.fary_milnor(trefoil) == "above_threshold"

    report = json.loads(pp.run_scene(str(ROOT / "scenes/square.json"), skip_funnel=True))
    failed = [a["check"] for a in report["analyses"] if not a["passed"]]
    assert report["passed"], failed

    print(f"plateau_py {pp.__version__}: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
