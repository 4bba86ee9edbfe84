"""How the optimised probes at nbar = 1 degrade under symmetric photon loss."""

from fockmetrology import LossSpec, Merit, optimize_at_nbar


def main():
    print(" eta    SCS QFI  SCS CFI      SSV     SVCS")
    for eta in (1.0, 0.95, 0.9, 0.8, 0.7):
        loss = LossSpec.symmetric(eta)
        row = [
            optimize_at_nbar("SCS", 1.0, loss).figure_of_merit,
            optimize_at_nbar("SCS", 1.0, loss, Merit.CFI_BEST_PHI).figure_of_merit,
            optimize_at_nbar("SSV", 1.0, loss).figure_of_merit,
            optimize_at_nbar("SVCS", 1.0, loss).figure_of_merit,
        ]
        print(f"{eta:4.2f} " + " ".join(f"{v:8.4f}" for v in row))


if __name__ == "__main__":
    main()
