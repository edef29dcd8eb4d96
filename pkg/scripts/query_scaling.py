"""Median k-junta tester queries over an eps grid, with an A + B/eps fit.

    python3 scripts/query_scaling.py --k 3 --n 16 --trials 15 --out scaling.csv
"""

import argparse
import csv
import sys

import numpy as np

from blocktest.bench import fit_inverse, random_junta
from blocktest.oracle import FunctionOracle
from blocktest.testers import span_queries, test_k_junta


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--trials", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-exp", type=int, default=4, help="largest eps is 2^-min_exp")
    p.add_argument("--max-exp", type=int, default=10, help="smallest eps is 2^-max_exp")
    p.add_argument("--out", default=None)
    args = p.parse_args(argv)

    f = random_junta(args.n, args.k, np.random.default_rng(args.seed))
    grid = [2.0**-j for j in range(args.min_exp, args.max_exp + 1)]
    rows, medians = [], []
    for eps in grid:
        qs, stages = [], {}
        for s in range(args.trials):
            v = test_k_junta(FunctionOracle(f), args.n, args.k, eps, rng=args.seed * 100_003 + s)
            qs.append(v.queries_used)
            for name, c in v.stage_counts.items():
                stages[name] = stages.get(name, 0) + c / args.trials
        medians.append(float(np.median(qs)))
        rows.append({"eps": eps, "median_queries": medians[-1], "span_queries": span_queries(eps, 1 / 20),
                     **{f"mean_{k}": round(v, 1) for k, v in sorted(stages.items())}})
    A, B, rel = fit_inverse(grid, medians)
    for r, e in zip(rows, rel):
        r["fit_residual"] = round(e, 4)

    fields = sorted({k for r in rows for k in r}, key=lambda k: (k != "eps", k))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        out.close()
    print(f"# fit: q(eps) = {A:.1f} + {B:.2f}/eps, max residual {max(rel):.3f} of B/eps", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
