#!/usr/bin/env python3
"""Map the momentum-ladder populations through one echo sequence.

Runs the ideal-kick sequence slightly off resonance, prints how far the
ladder spreads and how much returns to rest, and writes the per-kick
population map as CSV (one row per kick, one column per ladder site).
"""

import argparse
import csv

import numpy as np

from kickecho.ladder import SequenceSpec, momentum_history
from kickecho.params import rb85_params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-kicks", type=int, default=50)
    ap.add_argument("--phi-d", type=float, default=0.5)
    ap.add_argument("--eps-ns", type=float, default=3.0,
                    help="timing offset from resonance in ns")
    ap.add_argument("--out", default="momentum_map.csv")
    args = ap.parse_args()

    params = rb85_params()
    period = params.talbot_time + args.eps_ns * 1e-9
    spec = SequenceSpec(args.n_kicks, args.phi_d, period)
    q_values, history = momentum_history(spec, 0.0, params)

    q0 = int(np.nonzero(q_values == 0)[0][0])
    rms = np.sqrt(history @ (q_values.astype(float) ** 2))
    turn = args.n_kicks - 1
    print(f"kicks per train      : {args.n_kicks}")
    print(f"kick strength phi_d  : {args.phi_d}")
    print(f"timing offset        : {args.eps_ns} ns")
    print(f"rms ladder index     : {rms[turn]:.2f} at the turn, "
          f"{rms[-1]:.2f} at the end")
    print(f"returned population I: {history[-1, q0]:.6f}")

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kick_index"] + [f"pop_q_{q}" for q in q_values])
        for kick in range(history.shape[0]):
            writer.writerow([kick + 1] + [repr(p) for p in history[kick]])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
