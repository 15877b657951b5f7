"""Inf-sup constants on the (p, L, n) grid next to the published reference values."""
import argparse

from mqiga.infsup import compute_infsup

REFERENCE = {
    (2, 1): (0.8641, 0.8657, 0.8657, 0.8657, 0.8657, 0.8657, 0.8657),
    (2, 2): (0.9218, 0.9319, 0.9327, 0.9327, 0.9327, 0.9327, 0.9327),
    (2, 3): (0.9422, 0.9617, 0.9666, 0.9670, 0.9670, 0.9670, 0.9670),
    (3, 1): (0.8246, 0.8296, 0.8297, 0.8297, 0.8297, 0.8297, 0.8297),
    (3, 2): (0.8992, 0.9143, 0.9166, 0.9167, 0.9167, 0.9167, 0.9167),
    (3, 3): (0.9255, 0.9509, 0.9580, 0.9591, 0.9592, 0.9592, 0.9592),
}
NS = (8, 16, 32, 64, 128, 256, 512)


def main():
    argparse.ArgumentParser(description=__doc__).parse_args()
    print("p L " + " ".join(f"{n:>15d}" for n in NS))
    for (p, L), ref in REFERENCE.items():
        cells = [f"{compute_infsup(p, L, n):.4f} ({r:.4f})" for n, r in zip(NS, ref)]
        print(f"{p} {L} " + " ".join(cells))


if __name__ == "__main__":
    main()
