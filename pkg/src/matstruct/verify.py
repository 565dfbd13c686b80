"""End-to-end verification suites.

Each suite returns a list of :class:`Check` records (name, passed, detail).
They are used by ``matstruct verify`` and by the acceptance tests.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import analysis, immature, solver
from .characteristics import CharTables
from .model import (
    HillReentry,
    LinearDivision,
    LogAffineDelay,
    PowerLawVelocity,
    Profile,
    build_model,
    bump_data,
    constant_data,
    example_family,
    zero_below_data,
)

REFERENCE_B = 0.05
SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def closed_form_errors(kappa: float = 2.0, alpha: float = 4.0, n: int = 1000) -> dict:
    """Max errors of h, chi, Theta, Delta against their closed forms for the example family."""
    tables = CharTables(example_family(kappa=kappa, alpha=alpha))
    m = np.linspace(0.0, 1.0, n)
    s = np.linspace(0.0, 1.0, 7)[:, None]
    mm = m[None, :] * np.exp(-s)  # chi(s, mm) stays in [0, 1]
    theta = 0.5 * (np.sqrt(alpha**2 + 4.0 * m) - alpha)
    md = np.linspace(0.0, 1.0 / kappa, n)  # Delta saturates at Theta(1) above g(1)
    delta = 0.5 * (np.sqrt(4.0 * kappa * md + alpha**2) - alpha)
    return {
        "h": float(np.max(np.abs(tables.h(m) - m))),
        "chi": float(np.max(np.abs(tables.chi(s, mm) - mm * np.exp(s)))),
        "Theta": float(np.max(np.abs(tables.theta(m) - theta))),
        "Delta": float(np.max(np.abs(tables.delta(md) - delta))),
    }


def suite_closed_forms(tol: float = 1e-8) -> list[Check]:
    t0 = time.perf_counter()
    err = closed_form_errors()
    elapsed = time.perf_counter() - t0
    out = [Check(f"closed form {k}", v <= tol, f"max error {v:.3g} (tol {tol:g})") for k, v in err.items()]
    out.append(Check("closed forms runtime", elapsed < 5.0, f"{elapsed:.2f} s"))
    return out


# ---------------------------------------------------------------------------
# immature-system experiments
# ---------------------------------------------------------------------------


def stable_parameters(count: int = 20, seed: int = SEED, min_margin: float = 0.1) -> list[immature.ImmatureParams]:
    """Random Hill parameterizations of the m = 0 system with margin above ``min_margin``.

    The survival fraction is drawn below the stability threshold.  Cases whose
    linearised decay over 50 delays is weaker than exp(-12) are redrawn: close
    to the threshold the decay is real but too slow for a finite horizon.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        rho = rng.uniform(0.1, 1.0)
        beta0 = rng.uniform(0.5, 2.0)
        xi_max = min(0.95, (rho + beta0 - min_margin) / (2.0 * beta0))
        xi = rng.uniform(0.05, xi_max)
        p = immature.ImmatureParams(rho=rho, eta=rng.uniform(0.0, 0.5), r=rng.uniform(0.3, 1.0), xi_bar0=xi,
                                    pi_bar0=min(1.0 - xi, 0.5) + 0.01, beta0=beta0, theta=rng.uniform(0.5, 2.0),
                                    n=rng.uniform(1.0, 4.0))
        if p.margin > min_margin and immature.characteristic_root(p).dominant_real_part * 50.0 * p.r < -12.0:
            out.append(p)
    return out


def unstable_parameters(count: int = 6, seed: int = SEED + 1, max_margin: float = -0.1) -> list[immature.ImmatureParams]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        rho = rng.uniform(0.0, 0.3)
        beta0 = rng.uniform(1.0, 3.0)
        xi_min = (rho + beta0 - max_margin) / (2.0 * beta0)
        if xi_min >= 0.95:
            continue
        p = immature.ImmatureParams(rho=rho, eta=rng.uniform(0.0, 0.3), r=rng.uniform(0.5, 1.5),
                                    xi_bar0=rng.uniform(xi_min, 0.95), pi_bar0=0.05, beta0=beta0,
                                    theta=rng.uniform(0.5, 2.0), n=rng.uniform(1.5, 4.0))
        if p.margin <= max_margin:
            out.append(p)
    return out


def initial_segments(amplitude: float = 1.0) -> list[tuple[float, object]]:
    """Five nonnegative (mu(0), Gamma(0, a)) pairs."""
    A = amplitude
    return [
        (A, lambda a: np.full(np.shape(a), 0.5 * A)),
        (0.2 * A, lambda a: A * (1.0 + np.sin(3.0 * np.asarray(a, float)) ** 2)),
        (2.0 * A, lambda a: 0.1 * A * np.asarray(a, float)),
        (0.5 * A, lambda a: A * np.exp(-np.asarray(a, float))),
        (3.0 * A, lambda a: 2.0 * A * np.cos(np.asarray(a, float)) ** 2),
    ]


def _initial_sup(traj: immature.Trajectory) -> float:
    head = traj.t <= traj.params.r
    return float(np.max(np.abs(traj.x[head])))


def suite_stability(count: int = 20, decay: float = 1e-4) -> list[Check]:
    """Margin > 0.1: x falls below ``decay`` times its initial sup within 50 delays and J never increases."""
    out = []
    for i, p in enumerate(stable_parameters(count)):
        worst_ratio, worst_rise = 0.0, -math.inf
        for mu0, g0 in initial_segments():
            traj = immature.simulate(p, mu0, g0, 50.0 * p.r)
            ratio = float(np.min(np.abs(traj.x[traj.t >= p.r])) / _initial_sup(traj))
            worst_ratio = max(worst_ratio, ratio)
            J = immature.lyapunov_series(traj)[1]
            rise = float(np.max(np.diff(J)) / max(J[0], 1e-300))
            worst_rise = max(worst_rise, rise)
        ok_decay = worst_ratio < decay
        ok_J = worst_rise <= 10.0 * immature.RTOL
        out.append(Check(f"stable case {i} (margin {p.margin:.3f})", ok_decay and ok_J,
                         f"min x/sup0 {worst_ratio:.2e}, max relative J increase {worst_rise:.1e}"))
    return out


def suite_instability(count: int = 6, amplitude: float = 1e-3) -> list[Check]:
    """Margin <= -0.1: small data do not decay and the dominant root lies in the right half plane."""
    out = []
    for i, p in enumerate(unstable_parameters(count)):
        persists = True
        for mu0, g0 in initial_segments(amplitude):
            traj = immature.simulate(p, mu0, g0, 60.0 * p.r)
            persists &= analysis.x_persists(traj, amplitude)
        root = immature.characteristic_root(p).dominant_real_part
        out.append(Check(f"unstable case {i} (margin {p.margin:.3f})", persists and root > 0,
                         f"x persists {persists}, dominant root {root:.4f}"))
    return out


def suite_boundedness(count: int = 10, rel: float = 0.01) -> list[Check]:
    """rho > 0: sup of x over [0, T] and [0, 2T] agree to ``rel``."""
    out = []
    params = stable_parameters(count // 2, seed=SEED + 2) + unstable_parameters(count - count // 2, seed=SEED + 3)
    # a small rho makes the approach to the positive equilibrium very slow
    params = [immature.ImmatureParams(**{**p.__dict__, "rho": max(p.rho, 0.1)}) for p in params]
    segs = initial_segments(1.0)
    for i, p in enumerate(params):
        mu0, g0 = segs[i % len(segs)]
        T = 100.0 * p.r
        traj = immature.simulate(p, mu0, g0, 2.0 * T)
        s1 = float(np.max(traj.x[traj.t <= T]))
        s2 = float(np.max(traj.x))
        out.append(Check(f"bounded case {i} (rho {p.rho:.3f})", abs(s2 - s1) < rel * s1, f"sup T {s1:.6g}, sup 2T {s2:.6g}"))
    return out


def unbounded_model(gamma: float = 0.02):
    """rho = 0, V(m) = m^2, g(m) = m/2, Hill(1, 1, 2)."""
    return build_model(PowerLawVelocity(1.0, 2.0), LogAffineDelay(4.0), LinearDivision(2.0),
                       HillReentry(Profile.constant(1.0), Profile.constant(1.0), 2.0), delta=0.0, gamma=gamma)


def unbounded_experiment(mu0: float = 2.0, horizon: float = 100.0):
    """x(t) from mu(0) = 2 and constant Gamma(0, a) = f(2) under rho = 0.

    Returns (applies, reasons, trajectory).
    """
    p = immature.ImmatureParams.from_model(unbounded_model())
    level = float(p.f(mu0))
    g0 = lambda a: np.full(np.shape(a), level)  # noqa: E731
    chk = immature.unbounded_scenario_check(p, mu0, g0)
    traj = immature.simulate(p, mu0, g0, horizon * p.r)
    return chk, traj


def suite_unbounded() -> list[Check]:
    chk, traj = unbounded_experiment()
    incr = bool(np.all(np.diff(traj.x) > 0))
    growth = float(traj.x[-1] / traj.x[0])
    return [
        Check("unbounded conditions", chk.applies, "; ".join(chk.reasons) or "all hold"),
        Check("x strictly increasing", incr, f"min increment {np.min(np.diff(traj.x)):.3g}"),
        Check("x(T) > 10 x(0)", growth > 10.0, f"x(T)/x(0) = {growth:.4g}"),
    ]


# ---------------------------------------------------------------------------
# structured-solver experiments
# ---------------------------------------------------------------------------


def reference_spec():
    return example_family()


def dependence_pair():
    """Data that agree on [0, 0.05] and differ above it."""
    return constant_data(), constant_data() + zero_below_data(REFERENCE_B, 0.7)


def suite_dependence(M: int = 128) -> list[Check]:
    d1, d2 = dependence_pair()
    out = analysis.dependence_experiment(reference_spec(), d1, d2, REFERENCE_B, M=M)
    after = out.t >= out.t_full
    return [
        Check("exact agreement on [0, g(b)]", out.exact_below_gb, f"max diff {max(out.diff_below_gb.max(), out.diff_P_below_gb.max()):.3g}"),
        Check("agreement on [0, g(1)] after t_bar", out.agree_g1_after_t_bar, f"t_bar {out.t_bar:.4f}"),
        Check("N agreement on [0, 1] after t_full", out.agree_all_after_t_full,
              f"t_full {out.t_full:.4f}, max diff {out.diff_all[after].max():.3g} vs tol {out.tolerance[after].min():.3g}"),
        Check("P agreement on [0, 1] after t_full", out.agree_P_after_t_full,
              f"max diff {out.diff_P_all[after].max():.3g} vs tol {out.tolerance_P[after].min():.3g}"),
    ]


def extinction_data():
    return bump_data(0.5) + zero_below_data(REFERENCE_B)


def suite_extinction(M: int = 128) -> list[Check]:
    out = analysis.extinction_experiment(reference_spec(), REFERENCE_B, extinction_data(), M=M)
    return [
        Check("zeros on [0, g(b)]", out.zero_below_gb, "bit-exact"),
        Check("extinct before prediction", out.passed, f"sup N below {out.floor:g} at t={out.extinct_by:.4f} <= {out.predicted:.4f}"),
    ]


def self_convergence(Ms=(64, 128, 256), T: float = 16.0, data=None) -> tuple[list[float], list[float]]:
    """Max-norm change of N(T, .) between successive refinements and the resulting ratios."""
    spec = reference_spec()
    tables = CharTables(spec)
    data = data if data is not None else constant_data()
    dt0 = solver.default_dt(spec)
    sols = [solver.simulate(spec, data, T, M=M, dt=dt0 * Ms[0] / M, tables=tables) for M in Ms]
    diffs = []
    for coarse, fine in zip(sols[:-1], sols[1:]):
        diffs.append(float(np.max(np.abs(fine.sample("N", T, coarse.m) - coarse.N_at(T)))))
    return diffs, [a / b for a, b in zip(diffs[:-1], diffs[1:])]


SUITES = {
    "closed-forms": suite_closed_forms,
    "dependence": suite_dependence,
    "extinction": suite_extinction,
    "stability": suite_stability,
    "instability": suite_instability,
    "unbounded": suite_unbounded,
}


def run_suite(name: str) -> list[Check]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name]()
