"""Pairwise overlap tables |<a_i|b_j>|^2 for the five bases, with an unbiasedness flag."""

import itertools

import numpy as np

from intraqkd.optics import BasisLabel, mub_overlap_table, prepare_basis


def main():
    np.set_printoptions(precision=3, suppress=True)
    for a, b in itertools.combinations(BasisLabel, 2):
        t = mub_overlap_table(prepare_basis(a), prepare_basis(b))
        unbiased = np.allclose(t, 0.25, atol=1e-12)
        print(f"{a.value}-{b.value}: {'unbiased' if unbiased else 'NOT unbiased'}")
        if not unbiased:
            print(t)


if __name__ == "__main__":
    main()
