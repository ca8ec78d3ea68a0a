#!/usr/bin/env python3
"""Run the full experiment grid (three graphs, two loads) and print the
metric table. Thin wrapper over `vabnet run-suite`; pass any of its flags.

    python scripts/run_suite.py --seed 42 --out-dir results/
"""

import sys

from vabnet.cli import main

if __name__ == "__main__":
    sys.exit(main(["run-suite", *sys.argv[1:]]))
