#!/usr/bin/env python3
"""Finite-pulse width optimum across depth and kick number.

For every (gamma, N) cell the script finds the pulse duration that
minimizes the timing-scan width, then collapses the grid onto the
scaling laws tau_min ~ (gamma N)^(-1/2) and w_min ~ 1/(gamma N^2) and
fits both exponents.
"""

import argparse
import csv

from kickecho.params import rb85_params
from kickecho.scans import find_tau_min, fit_scaling


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma-list", default="1,10,100")
    ap.add_argument("--n-list", default="16,32,64,128")
    ap.add_argument("--out", default="pulse_scaling.csv")
    args = ap.parse_args()

    params = rb85_params()
    gammas = [float(s) for s in args.gamma_list.split(",")]
    ns = [int(s) for s in args.n_list.split(",")]

    rows = []
    print(f"{'gamma':>7} {'N':>4} {'tau_min [us]':>13} {'w_min [ns]':>11} "
          f"{'tau*sqrt(gN)':>13} {'w*gN^2 [us]':>12}")
    for gamma in gammas:
        for n in ns:
            if gamma * n <= 1.0:
                continue
            tau, w = find_tau_min(n, gamma, params)
            tau_product = tau * 1e6 * (gamma * n) ** 0.5
            w_product = w * 1e6 * gamma * n**2
            rows.append([gamma, n, tau, w, tau_product, w_product])
            print(f"{gamma:>7.1f} {n:>4} {tau * 1e6:>13.4f} {w * 1e9:>11.4f} "
                  f"{tau_product:>13.2f} {w_product:>12.2f}")

    tau_fit = fit_scaling([(g * n, tau) for g, n, tau, *_ in rows])
    w_fit = fit_scaling([(g**0.5 * n, w) for g, n, _, w, *_ in rows])
    print(f"tau_min vs gamma*N      : exponent {tau_fit.exponent:+.4f}, "
          f"prefactor {tau_fit.prefactor * 1e6:.2f} us")
    print(f"w_min vs sqrt(gamma)*N  : exponent {w_fit.exponent:+.4f}, "
          f"prefactor {w_fit.prefactor * 1e6:.2f} us")

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "gamma", "n_pulses", "tau_min_s", "w_min_s",
            "tau_product_us", "w_product_us",
        ])
        writer.writerows(rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
