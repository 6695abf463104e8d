"""Proving knowledge of a Hamiltonian cycle, and pulling the cycle back out.

An honest prover convinces the verifier.  A prover without a cycle must
guess each challenge bit and is caught almost always.  A simulated verifier
that fixes a binding commitment key extracts the cycle from any accepting
proof.
"""

import numpy as np

from qcw.mixedcommit import LweParams
from qcw.zkpk import is_hamiltonian_cycle, random_hamiltonian, simulate_against_prover, zkpk_run

SIGMA = 8


def main():
    rng = np.random.default_rng(7)
    x = random_hamiltonian(8, rng)
    small = LweParams.small()

    res = zkpk_run(x, "honest", SIGMA, rng, key_params=small)
    print(f"honest prover: {res.verdict}")

    caught = sum(not zkpk_run(x, "cheat", SIGMA, rng, key_params=small).accepted for _ in range(50))
    print(f"prover without a cycle: rejected {caught} of 50")

    res = simulate_against_prover(x, "honest", SIGMA, rng, key_params=small)
    cycle = res.extracted
    print(f"extracted cycle {cycle}, valid={cycle is not None and is_hamiltonian_cycle(x.adj, cycle)}")


if __name__ == "__main__":
    main()
