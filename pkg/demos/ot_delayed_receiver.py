"""A receiver who postpones measurement, with and without the compiler.

Without the commit-and-open step the receiver waits for the basis
announcement, measures every qubit in the right basis and recovers both
strings.  With it, the receiver must commit to measurement results before
the bases are known, and the opened positions expose the guesswork.
"""

import numpy as np

from qcw.harness.session import run_session

SEEDS = range(5)


def plain():
    print("plain OT, delayed receiver")
    for seed in SEEDS:
        out, _ = run_session("ot", {"B": "delayed"}, {"compiled": False}, seed=seed)
        v = out.values
        both = np.array_equal(v["output"], v[f"s{v['k']}"]) and np.array_equal(v["other"], v[f"s{1 - v['k']}"])
        print(f"  seed {seed}: accepted={out.accepted} learned both strings={both}")


def compiled():
    print("compiled OT, delayed receiver")
    for seed in SEEDS:
        out, _ = run_session("ot", {"B": "delayed"}, {"phi_prime": 0.02}, seed=seed)
        print(f"  seed {seed}: accepted={out.accepted} reason={out.reason}")


if __name__ == "__main__":
    plain()
    compiled()
