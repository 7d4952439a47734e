"""Count conserved observables (modulo trivial ones) for all elementary binary rules."""

import argparse
import itertools

from surjca.conservation import discover_conserved
from surjca.symbolic import Sft1D, SlidingBlockMap1D


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--range", type=int, default=2)
    args = ap.parse_args()
    sft = Sft1D.from_strings("01")
    words = list(itertools.product(range(2), repeat=3))
    print("rule,quotient_dim")
    for code in range(256):
        # Wolfram numbering: neighbourhood 111 is the most significant bit
        rule = {w: code >> (4 * w[0] + 2 * w[1] + w[2]) & 1 for w in words}
        phi = SlidingBlockMap1D(sft, sft, -1, 1, rule)
        print(f"{code},{discover_conserved(phi, args.range).quotient_dim}")


if __name__ == "__main__":
    main()
