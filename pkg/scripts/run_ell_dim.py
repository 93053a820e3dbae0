#!/usr/bin/env python3
"""Greedy-net dimension estimate: dbar on the tree boundary (expect order 1
at every scale) and d_1 on the circle (expect order 2)."""

import math
import sys

from visbound.cli import main

if __name__ == "__main__":
    tree_scales = ",".join(f"{4 * math.exp(-k):.17g}" for k in range(1, 9))
    rc = main(["ell-dim", "--space", "tree4", "--metric", "dbar", "--n", "600",
               "--scales", tree_scales, "--seed", "0",
               "--out", "out/ell-dim-tree4"] + sys.argv[1:])
    circle_scales = ",".join(f"{2.0 ** -k:.17g}" for k in range(1, 7))
    rc = max(rc, main(["ell-dim", "--space", "euclidean2", "--metric", "dA",
                       "--A", "1", "--n", "1500", "--scales", circle_scales,
                       "--seed", "0", "--out", "out/ell-dim-circle"] + sys.argv[1:]))
    sys.exit(rc)
