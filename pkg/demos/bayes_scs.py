"""Bayesian phase estimation with the optimised squeezed cat, compared with the Cramer-Rao bound."""

from fockmetrology import bayes_ensemble, qfi_pure
from fockmetrology.acceptance import optimized_scs


def main(trials=50):
    res, space = optimized_scs(1.0)
    psi = res.spec.probe(space)
    q = qfi_pure(psi)
    print(f"SCS alpha={res.best_alpha:.3f} z={res.best_z:.3f} QFI={q:.4f}")
    for mu in (10, 50, 100, 400):
        rep = bayes_ensemble(psi, 0.6, mu, trials, seed=1, qfi=q)
        print(f"mu={mu:4d}  sigma={rep.mean_sigma:.4f}  crb={rep.crb_reference:.4f}  ratio={rep.mean_sigma / rep.crb_reference:.2f}")


if __name__ == "__main__":
    main()
