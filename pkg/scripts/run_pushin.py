#!/usr/bin/env python3
"""Annular tube cover of T_4 from depth-kR cylinder covers of the
boundary, with the disjointness / mesh / decay claims checked on a
sampled window."""

import sys

from visbound.cli import main

if __name__ == "__main__":
    sys.exit(main(["cover-pushin", "--space", "tree4", "--R", "2", "--K", "5",
                   "--window", "14", "--n", "120", "--n-triples", "8000",
                   "--seed", "0", "--out", "out/pushin-tree4"] + sys.argv[1:]))
