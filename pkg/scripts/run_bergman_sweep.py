#!/usr/bin/env python3
"""Bergman density k-sweep for the perturbed metric.

Writes bergman_sweep.json with per-k max|rho - 1|, the k-scaled deviation,
and the fitted decay exponents; flags override the defaults.
"""

import sys

from bergman_lab.cli import run


def main(argv):
    if argv:
        return run(["sweep", *argv])
    return run(["sweep", "--k-list", "4:16", "--epsilon", "0.05",
                "--grid", "48,48", "--out", "bergman_sweep.json"])


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
