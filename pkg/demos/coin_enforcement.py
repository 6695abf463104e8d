"""Steering coin strings to a chosen target.

An honest run gives a fresh random string each time.  A simulator that can
rewind the responder, or that holds the trapdoor of a binding key, lands on
any target it likes while the corrupted party sees an ordinary run.
"""

import numpy as np

from qcw import coinflip

TARGET = coinflip.hex_to_bits("a5", 8)


def honest():
    rng = np.random.default_rng(1)
    draws = [coinflip.coin_sequential(8, rng=rng).hex() for _ in range(5)]
    print("honest strings:", " ".join(draws))


def against_bob():
    out, retries = coinflip.enforce_against_bob(TARGET, rng=np.random.default_rng(2))
    print(f"rewinding the responder: {out.hex()} after {retries} rewinds")


def against_alice():
    out = coinflip.enforce_against_alice(TARGET, rng=np.random.default_rng(3))
    print(f"extracting from the committer: {out.hex()}")


def amplified():
    rng = np.random.default_rng(4)
    for side, fn in (("alice", coinflip.enforce_ff_against_alice), ("bob", coinflip.enforce_ff_against_bob)):
        party = coinflip.make_party(None, rng)
        out = fn(TARGET, party, 8, 4, rng=rng)
        print(f"amplified flavor, corrupted {side}: {out.hex()}")


if __name__ == "__main__":
    honest()
    against_bob()
    against_alice()
    amplified()
