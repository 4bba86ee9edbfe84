"""Optimised lossless QFI against mean photon number for each probe family."""

import numpy as np

from fockmetrology import optimize_at_nbar

FAMILIES = ["NOON", "SSV", "SVCS", "SES", "SCS"]


def main():
    nbars = [0.5, 1.0, 2.0, 3.0]
    print("nbar  " + "  ".join(f"{f:>8}" for f in FAMILIES))
    for n in nbars:
        cells = []
        for fam in FAMILIES:
            if fam == "NOON" and n != round(n):
                cells.append(f"{'-':>8}")
                continue
            cells.append(f"{optimize_at_nbar(fam, n).figure_of_merit:8.4f}")
        print(f"{n:4.1f}  " + "  ".join(cells))
    print("shot noise nbar, SSV bound nbar^2 + 2 nbar:", [(n, n * n + 2 * n) for n in nbars])


if __name__ == "__main__":
    main()
