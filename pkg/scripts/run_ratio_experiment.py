#!/usr/bin/env python3
"""Full Hilbert-Schmidt vs Sobolev ratio experiment, both shipped metrics.

Produces ratio_eps0.json / ratio_eps005.json plus per-sample CSVs in the
working directory; pass CLI flags to override any default (see
bergman-lab ratio --help).
"""

import sys

from bergman_lab.cli import run


def main(argv):
    if argv:
        return run(["ratio", *argv])
    code = 0
    for eps, tag in ((0.0, "eps0"), (0.05, "eps005")):
        code |= run(["ratio", "--k-list", "2:16", "--samples", "100",
                     "--epsilon", str(eps), "--grid", "48,48",
                     "--seed", "20240501", "--deterministic-reduction",
                     "--out", f"ratio_{tag}.json"])
    return code


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
