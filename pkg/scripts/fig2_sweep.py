"""Key rate versus channel error for several leak fidelities F, as CSV.

    python3 scripts/fig2_sweep.py --F 1 0.6 0.5 --steps 301 > rates.csv
"""

import argparse
import sys

from intraqkd.cli import sweep_table
from intraqkd.infotheory import solve_threshold


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--F", type=float, nargs="+", default=[1.0, 0.6, 0.5])
    p.add_argument("--e-min", type=float, default=0.0)
    p.add_argument("--e-max", type=float, default=0.3)
    p.add_argument("--steps", type=int, default=301)
    p.add_argument("--p1", type=float, default=0.5)
    args = p.parse_args()
    sys.stdout.write(sweep_table(args.F, args.e_min, args.e_max, args.steps, args.p1))
    for F in args.F:
        scenario = "conventional" if F == 1 else "side_channel"
        print(f"# F = {F}: key rate vanishes at e = {solve_threshold(scenario, F, args.p1):.6f}", file=sys.stderr)


if __name__ == "__main__":
    main()
