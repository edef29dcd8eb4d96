"""Accept rates on in-class and certified-far instances for each tester.

    python3 scripts/completeness_soundness.py --trials 50 --out-dir reports/
"""

import argparse
from pathlib import Path

from blocktest.bench import ExperimentConfig, InstanceSpec, run_experiment

CASES = {
    "junta": dict(n=16, k=3),
    "fourier": dict(n=12, d=2),
    "sparse-deg": dict(n=12, s=2, d=2),
}
# exact Fourier-degree distances enumerate all Boolean functions, so far instances stay tiny
FAR_CASES = {"fourier": dict(n=4, d=2)}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None, help="write one CSV+JSON report per case")
    args = p.parse_args(argv)

    print("class,instance,eps,accept_rate,median_queries,distance")
    for cls, params in CASES.items():
        for far in (None, args.eps):
            spec = InstanceSpec(cls, far=far, **(FAR_CASES.get(cls, params) if far else params))
            tag = "far" if far else "member"
            out = str(Path(args.out_dir) / f"{cls}-{tag}.csv") if args.out_dir else None
            rep = run_experiment(ExperimentConfig(spec, trials=args.trials, seed=args.seed,
                                                  eps_grid=(args.eps,), out=out))
            row = rep.rows[0]
            print(f"{cls},{tag},{args.eps},{row['accept_rate']:.3f},{row['q50']:.0f},{rep.instance['distance']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
