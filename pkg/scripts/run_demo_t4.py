#!/usr/bin/env python3
"""Full T_4 boundary demo: visual-fit constants for dbar, the d_A
non-visuality table, the non-quasi-symmetry table, and uniform-perfectness
witnesses.  Extra flags are passed through to the CLI."""

import sys

from visbound.cli import main

if __name__ == "__main__":
    sys.exit(main(["demo-t4", "--out", "out/demo-t4", "--n", "100",
                   "--seed", "0"] + sys.argv[1:]))
