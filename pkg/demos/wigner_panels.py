"""Wigner functions of the four reference states, written to wigner_panels.csv."""

import csv

from fockmetrology.acceptance import wigner_panel_states
from fockmetrology.phase_space import wigner


def main(path="wigner_panels.csv", resolution=121):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["panel", "x", "p", "w"])
        for name, state in wigner_panel_states().items():
            grid = wigner(state, (-9, 9), (-9, 9), resolution)
            print(f"{name:20s} min W = {grid.values.min():+.4f}  norm = {grid.normalization:.6f}")
            for i, x in enumerate(grid.xs):
                for j, p in enumerate(grid.ps):
                    out.writerow([name, repr(float(x)), repr(float(p)), repr(float(grid.values[i, j]))])
    print("wrote", path)


if __name__ == "__main__":
    main()
