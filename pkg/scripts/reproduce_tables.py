"""Rebuild the three preset PRE tables and show the gap to the reference cells."""

import argparse

from nonresp.scenarios import PRESETS, build_table, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", default=sorted(PRESETS))
    ap.add_argument("--tol", type=float, default=0.01)
    args = ap.parse_args()

    for name in args.names:
        spec = preset(name)
        print(f"== {name}  design={spec.design.as_dict()}")
        print(f"{'W2':>5} {'column':>10} {'computed':>12} {'reference':>12} {'diff':>9}")
        agree = total = 0
        for row in build_table(spec):
            ref = spec.reference.get(row.W2)
            for label, value, r in zip(("ratio", "regression", "optimum"), row.cells(),
                                       ref or (None,) * 3):
                diff = "" if r is None else f"{value - r:+9.5f}"
                if r is not None:
                    total += 1
                    agree += abs(value - r) <= args.tol
                print(f"{row.W2:5.2f} {label:>10} {value:12.5f} "
                      f"{'' if r is None else f'{r:12.5f}':>12} {diff:>9}")
        print(f"{agree}/{total} cells within {args.tol}")
        for note in spec.notes:
            print(f"  * {note}")
        print()


if __name__ == "__main__":
    main()
