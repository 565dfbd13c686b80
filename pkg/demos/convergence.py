"""Self-convergence of the field solver on the reference model.

Halves the maturity spacing and the step together and prints the max-norm
change of N(T, .) between successive levels.  Run with
``python3 demos/convergence.py``.
"""
import time

from matstruct import verify


def main(Ms=(32, 64, 128, 256)):
    t0 = time.perf_counter()
    diffs, ratios = verify.self_convergence(Ms=Ms)
    print(f"{'levels':>12} {'max diff':>12} {'ratio':>8}")
    for i, d in enumerate(diffs):
        ratio = f"{ratios[i - 1]:8.2f}" if i else f"{'':>8}"
        print(f"{Ms[i]:>5}->{Ms[i + 1]:<5} {d:12.3e} {ratio}")
    print(f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
