"""Boundary-layer problem: oscillation amplitude versus L and condition numbers versus mesh."""
import argparse

from mqiga.benchmarks import condition_sweep, max_deviation_1d, run_case


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=5)
    ap.add_argument("--elements", type=int, default=512)
    ap.add_argument("--meshes", default="64,128,256,512")
    ap.add_argument("--cb", type=float, default=0.1)
    args = ap.parse_args()

    print("L  max|u_h - x| on [0, 0.9]")
    for L in range(1, 6):
        _, sol = run_case(2, "mq", (args.degree,), (args.elements,), L, args.cb)
        print(f"{L}  {max_deviation_1d(sol, lambda X: X[0], 0.9):.3e}")

    meshes = [int(v) for v in args.meshes.split(",")]
    print("\nne    dofs   kappa(galerkin)   kappa(mq)   kappa(supg)")
    reps = condition_sweep(2, args.degree, meshes, ["galerkin", "mq", "supg"], cb=args.cb)
    for i, n in enumerate(meshes):
        g, m, s = reps[3 * i: 3 * i + 3]
        print(f"{n:<5} {g.dofs:>5} {g.cond:17.4g} {m.cond:11.4g} {s.cond:13.4g}")


if __name__ == "__main__":
    main()
