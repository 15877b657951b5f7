"""Internal-layer problem: undershoot (min) and outflow variation (diff) per degree."""
import argparse

from mqiga.benchmarks import run_case

REFERENCE_MQ = {2: (0.0316, 0.1779), 3: (0.0283, 0.2906), 4: (0.0254, 0.2307), 5: (0.0205, 0.2788)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--methods", default="mq,supg")
    ap.add_argument("--degrees", default="2,3,4,5")
    ap.add_argument("--elements", type=int, default=64)
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--cb", type=float, default=0.01)
    args = ap.parse_args()
    print(f"{'method':>13} {'p':>2} {'min':>8} {'diff':>8} {'ref min':>8} {'ref diff':>8}")
    for p in (int(v) for v in args.degrees.split(",")):
        for method in args.methods.split(","):
            rep, _ = run_case(4, method, (p, p), (args.elements,) * 2, args.levels, args.cb,
                              indicators=True)
            ref = REFERENCE_MQ[p] if method.startswith("mq") else ("", "")
            print(f"{method:>13} {p:>2} {rep.min:8.4f} {rep.diff:8.4f} {ref[0]!s:>8} {ref[1]!s:>8}")


if __name__ == "__main__":
    main()
