"""Stability verdicts over a grid of the example family, plus two stem-cell trajectories.

Run with ``python3 demos/stability_map.py``.  Prints text tables only.
"""
import numpy as np

from matstruct import analysis, immature
from matstruct.model import example_family

KAPPAS = [1.5, 2.0, 2.5, 3.0, 4.0]
DELTAS = [0.1, 1.0, 3.0, 6.0, 10.0, 20.0]
SHORT = {"GloballyExpStable": "stable", "ImmatureStableOnly": "m=0 only", "Unstable": "unstable"}


def verdict_table():
    print("verdicts for alpha=4, gamma=6, Hill(1, 1, 2)")
    print("kappa \\ delta " + "".join(f"{d:>12g}" for d in DELTAS))
    for k in KAPPAS:
        row = []
        for d in DELTAS:
            rep = analysis.classify(example_family(kappa=k, delta=d, gamma=6.0))
            row.append(SHORT.get(rep.verdict, rep.verdict))
        print(f"{k:>13g} " + "".join(f"{v:>12}" for v in row))


def trajectories():
    cases = {
        "stable (delta=6)": example_family(delta=6.0, gamma=6.0),
        "unstable (kappa=4, alpha=4.5, delta=0)": example_family(kappa=4.0, alpha=4.5, delta=0.0, gamma=0.0, beta0=2.0),
    }
    for name, spec in cases.items():
        p = immature.ImmatureParams.from_model(spec)
        traj = immature.simulate(p, 1.0, lambda a: np.full(np.shape(a), 0.5), 40.0 * p.r)
        times = np.linspace(0.0, traj.t[-1], 9)
        print(f"\n{name}: margin {p.margin:.4f}, dominant root {immature.characteristic_root(p).dominant_real_part:.4f}")
        print("  t      " + "".join(f"{t:>10.2f}" for t in times))
        print("  x(t)   " + "".join(f"{x:>10.3e}" for x in traj.x_at(times)))


if __name__ == "__main__":
    verdict_table()
    trajectories()
