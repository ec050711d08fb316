"""Read one set of commutative transition data under each sign rule and check
whether the cocycle condition survives.

    python scripts/sign_rules_demo.py [--cap 6]
"""

import argparse
import pathlib

from z2nsuper import Convention, check_cocycle, load, superize

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cap", type=int, default=6)
    args = parser.parse_args()

    base = load(FIXTURES / "sign_rules_comm.atl")
    for convention in Convention:
        report = check_cocycle(superize(base, convention), args.cap)
        print(report.format())
    signed = load(FIXTURES / "sign_rules_parity_signs.atl")
    print("with compensating signs under the parity rule:")
    print(check_cocycle(signed, args.cap).format())


if __name__ == "__main__":
    main()
