#!/usr/bin/env python3
"""Measure how deep the confirmation graph actually gets.

Runs the triangular lattice at high load with nested re-confirmations
enabled (the expensive configuration) and reports the distribution of
maximum contributing depth across indirect acceptances, plus the
fraction that needed depth greater than 3.

    python scripts/depth_utilization.py [seed]
"""

import sys
from collections import Counter

from vabnet.graphs import triangular_lattice_graph
from vabnet.metrics import compute_metrics
from vabnet.sim import LoadProfile, PropagationModel, ProtocolConfig, run_simulation


def main(seed: int = 0) -> int:
    log = run_simulation(
        triangular_lattice_graph(21),
        PropagationModel(kind="global"),
        LoadProfile.high(),
        ProtocolConfig(confirm_confirmations=True),
        seed=seed,
    )
    report = compute_metrics(log)
    depths = Counter(
        int(r.fields[6]) for r in log.records if r.kind == "INDIRECT_ACCEPTED")
    print(f"indirect acceptances: {report.indirect_receptions}")
    for depth in sorted(depths):
        share = depths[depth] / report.indirect_receptions
        print(f"  max contributing depth {depth}: {depths[depth]:5d}  ({share:.1%})")
    print(f"fraction using depth > 3: {report.deep_acceptance_fraction:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main(int(sys.argv[1]) if len(sys.argv) > 1 else 0))
