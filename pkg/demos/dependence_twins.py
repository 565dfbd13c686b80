"""Two runs whose initial data agree on [0, 0.05] and differ above it.

The difference on [0, g(b)] stays exactly zero; on [0, g(1)] it dies out at
t_bar and on the whole interval at t_full.  Run with
``python3 demos/dependence_twins.py``.
"""
from matstruct import analysis, verify


def main(M=128):
    d1, d2 = verify.dependence_pair()
    out = analysis.dependence_experiment(verify.reference_spec(), d1, d2, verify.REFERENCE_B, M=M)
    print(f"t_bar = {out.t_bar:.6f}, t_full = {out.t_full:.6f}")
    print(f"{'t':>8} {'[0,g(b)]':>10} {'[0,g(1)]':>10} {'[0,1] N':>10} {'[0,1] P':>10} {'tol N':>10}")
    for i, t in enumerate(out.t):
        print(f"{t:8.3f} {out.diff_below_gb[i]:10.2e} {out.diff_below_g1[i]:10.2e} "
              f"{out.diff_all[i]:10.2e} {out.diff_P_all[i]:10.2e} {out.tolerance[i]:10.2e}")


if __name__ == "__main__":
    main()
