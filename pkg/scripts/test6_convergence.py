"""Pure-advection layer problem: relative errors and rates for Galerkin and MQ."""
import argparse

from mqiga.benchmarks import convergence_sweep

REFERENCE = {
    "galerkin": ((0.3920, 0.1985, 0.0314, 0.000402), (1.6015, 1.5507, 0.4791, 0.0127)),
    "mq": ((0.0455, 0.0240, 0.00734, 0.000211), (0.6222, 0.4992, 0.1645, 0.00808)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--methods", default="galerkin,mq")
    ap.add_argument("--degrees", default="2,3")
    ap.add_argument("--meshes", default="64,128,256,512")
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--cb", type=float, default=0.01)
    args = ap.parse_args()
    degrees = tuple(int(v) for v in args.degrees.split(","))
    meshes = [int(v) for v in args.meshes.split(",")]
    for method in args.methods.split(","):
        reps = convergence_sweep(6, method, degrees, [(8, n) for n in meshes],
                                 args.levels, args.cb)
        ref_l2, ref_h1 = REFERENCE.get(method, ((None,) * 4, (None,) * 4))
        print(f"\n{method}  p={degrees} L={args.levels} cb={args.cb}")
        print(f"{'ne2':>5} {'L2':>10} {'rate':>6} {'ref':>9} {'H1':>10} {'rate':>6} {'ref':>9}")
        for i, r in enumerate(reps):
            rl2 = ref_l2[i] if degrees == (2, 3) and i < len(ref_l2) else None
            rh1 = ref_h1[i] if degrees == (2, 3) and i < len(ref_h1) else None
            print(f"{r.elements[1]:>5} {r.rel_l2:10.4g} {_f(r.rate_l2):>6} {_f(rl2, '.4g'):>9}"
                  f" {r.rel_h1:10.4g} {_f(r.rate_h1):>6} {_f(rh1, '.4g'):>9}")


def _f(v, fmt=".2f"):
    return "-" if v is None else format(v, fmt)


if __name__ == "__main__":
    main()
