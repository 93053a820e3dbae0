#!/usr/bin/env python3
"""Boundary pushout of the orbit-ball cover on the tree and the plane,
measured across a geometric range of scales."""

import sys

from visbound.cli import main

if __name__ == "__main__":
    rc = 0
    for space in ("tree4", "euclidean2"):
        rc = max(rc, main(["cover-pushout", "--space", space, "--A", "1",
                           "--R", "2", "--n", "500", "--seed", "0",
                           "--out", f"out/pushout-{space}"] + sys.argv[1:]))
    sys.exit(rc)
