import logging
import argparse

import numpy as np

import qcrb.utils as utils

from qcrb.bounds import bound_beta, max_beta_scan
from qcrb.holevo import build_extension, holevo_min_f
from qcrb.ladder import compute_ladder, resolve_weight
from qcrb.model import example_dim2, example_dim2_beta_star, example_dim4, example_dim4_beta_star

# Contraction of the example families; values near 1 make the state nearly pure
A = 0.95


def main():

    ap = argparse.ArgumentParser(description="Bound ladder of the qubit and two-qubit examples")
    ap.add_argument("--a", type=float, default=A, help="Contraction a in (0, 1)")
    ap.add_argument("--step", type=float, default=0.1, help="Step of the r grid")
    ap.add_argument(
        "--curve",
        default=False,
        help="Also print C_beta over beta at r = 0.1",
        action="store_const",
        const=True,
    )
    ap.add_argument(
        "--debug",
        default=False,
        help="Show debug messages",
        action="store_const",
        const=True,
    )
    args = ap.parse_args()

    log = utils.init_logger("qcrb", level=logging.DEBUG if args.debug else logging.INFO)
    log.info(f"Args: {args}")

    for name, family, exact in (
        ("dim2", example_dim2, example_dim2_beta_star),
        ("dim4", example_dim4, example_dim4_beta_star),
    ):
        print(f"{name}:  r  beta*  beta*(exact)  C_max_beta  C_holevo")
        for r in np.arange(0.0, 1.0 - 1e-9, args.step):
            m = family(args.a, r)
            g = resolve_weight("sld", m)
            c_b, beta = max_beta_scan(g, m)
            c_h = holevo_min_f(g, build_extension(m)).value
            print(f"  {r:4.2f}  {beta:.6f}  {exact(args.a, r):.6f}  {c_b:.9f}  {c_h:.9f}")

    if args.curve:
        m = example_dim2(args.a, 0.1)
        g = resolve_weight("sld", m)
        print("C_beta at r = 0.1:")
        for b in np.linspace(0.0, 1.0, 11):
            print(f"  {b:.1f}  {bound_beta(g, m, b):.9f}")

    report = compute_ladder(example_dim2(args.a, 0.1), resolve_weight("sld", example_dim2(args.a, 0.1)))
    print("dim2 at r = 0.1:", report.to_dict())


if __name__ == "__main__":
    main()
