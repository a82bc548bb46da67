#!/usr/bin/env python3
"""Run the bundled six-inverter benchmark end to end.

Produces the full artifact set (proportional-only at alpha = 10 and 30,
full PID, and PI) as plot-ready CSV traces plus a comparison report, then
prints the headline numbers: consensus value, residual disagreements, and
the steady integral-state norms of PID vs PI.

Usage:
    python scripts/run_benchmark.py [OUT_DIR]
"""

import json
import sys
from pathlib import Path

from pidnet.cli import main as cli_main


def run(out_dir: str) -> int:
    code = cli_main(["reproduce", "--out", out_dir, "--json"])
    if code != 0:
        return code
    report = json.loads((Path(out_dir) / "report.json").read_text())
    scen = report["scenarios"]
    comp = report["comparison"]
    print()
    print("=== six-inverter benchmark summary ===")
    print(f"consensus value (PID run): {scen['pid']['x_inf']:.6g}")
    print(f"final states (PID run):    {[round(v, 4) for v in scen['pid']['final_state']]}")
    print("residual disagreement, proportional-only:")
    print(f"  alpha = 10: {comp['proportional_residual']['alpha_10']:.4g}")
    print(f"  alpha = 30: {comp['proportional_residual']['alpha_30']:.4g}")
    print("steady ||z||:")
    print(f"  PID (gamma = 1): {comp['pid_vs_pi_steady_z']['pid']:.4g}")
    print(f"  PI  (gamma = 0): {comp['pid_vs_pi_steady_z']['pi']:.4g}")
    print("proportional-gain threshold (gamma = 1):")
    print(f"  exact ||H1||:   alpha > {comp['alpha_threshold']['exact']:.4g}")
    print(f"  conservative:   alpha > {comp['alpha_threshold']['conservative']:.4g}")
    print(f"  reference:      alpha > {comp['alpha_threshold']['reference']:.4g} (reported only)")
    return 0


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/benchmark"
    raise SystemExit(run(out))
