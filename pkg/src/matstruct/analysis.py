"""Stability criteria, dependence and extinction experiments, and reports."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .characteristics import CharTables, DomainError
from .immature import ImmatureParams, Trajectory, characteristic_root, classify_stability
from .model import InitialData, ModelSpec, validation_grid
from . import solver


class PreconditionViolated(ValueError):
    """Experiment inputs do not satisfy the stated assumptions."""


@dataclass(frozen=True)
class LocalCriterion:
    lhs: float
    rhs: float
    holds: bool
    sup_xi: float
    sup_beta0: float


def _grid(n=1024):
    return np.concatenate([[0.0], validation_grid(n=n)])


def sup_xi_layer(tables: CharTables, n_m: int = 1024, n_t: int = 17) -> float:
    """sup of xi(t, m) over 0 <= t <= tau(Delta(m)).

    When gamma + V' >= 0 the rate decreases in t and the supremum is taken at
    t = 0, where xi(0, m) = (g^-1)'(m); otherwise a (t, m) sample grid is used.
    """
    spec = tables.spec
    m = _grid(n_m)
    if np.min(spec.gamma(m) + spec.velocity.derivative(m)) >= 0:
        return float(np.max(tables.xi(0.0, m)))
    m = _grid(min(n_m, 256))
    tau = spec.delay(tables.delta(m))
    t = tau[:, None] * np.linspace(0.0, 1.0, n_t)[None, :]
    return float(np.max(tables.xi(t, np.broadcast_to(m[:, None], t.shape))))


def local_criterion(spec: ModelSpec, tables: CharTables | None = None) -> LocalCriterion:
    """(1 + 2 sup xi) sup_m beta(m, 0) < min(inf(delta + V'), inf(gamma + V')).

    ``beta(m, 0)`` is the Hill amplitude beta0(m).
    """
    tables = tables if tables is not None else CharTables(spec)
    m = _grid()
    dV = spec.velocity.derivative(m)
    sxi = sup_xi_layer(tables)
    sb = float(np.max(spec.reentry.beta0(m)))
    lhs = (1.0 + 2.0 * sxi) * sb
    rhs = float(min(np.min(spec.delta(m) + dV), np.min(spec.gamma(m) + dV)))
    return LocalCriterion(lhs, rhs, bool(lhs < rhs), sxi, sb)


@dataclass
class StabilityReport:
    """Evaluated criteria and the combined verdict.

    ``verdict`` is one of GloballyExpStable, ImmatureStableOnly, Unstable,
    Indeterminate.
    """

    local: LocalCriterion
    delta_strict: dict
    immature: dict
    verdict: str
    schedule: dict | None = None
    simulation: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "local_criterion": asdict(self.local),
            "delta_strict": self.delta_strict,
            "immature": self.immature,
            "schedule": self.schedule,
            "simulation": self.simulation,
            "verdict": self.verdict,
        }

    def summary(self) -> str:
        lc = self.local
        im = self.immature
        lines = [
            f"verdict: {self.verdict}",
            f"local criterion: lhs={lc.lhs:.6g} rhs={lc.rhs:.6g} holds={lc.holds}",
            f"Delta(m) < m: {self.delta_strict['holds']} (slope at 0: {self.delta_strict['origin_slope']:.6g})",
            f"immature: {im['verdict']} margin={im['margin']:.6g} dominant root={im['dominant_root']:.6g}",
        ]
        if self.schedule:
            s = self.schedule
            lines.append(f"schedule: N={s['N']} t_bar={s['t_bar']:.6g} t_full={s['t_full']:.6g}")
        for k, v in sorted(self.simulation.items()):
            lines.append(f"simulation {k}: {v}")
        return "\n".join(lines)


def combine(local_holds: bool, delta_holds: bool, margin: float) -> str:
    if local_holds and delta_holds:
        return "GloballyExpStable"
    if margin <= 0:
        return "Unstable"
    if not local_holds:
        return "ImmatureStableOnly"
    return "Indeterminate"


def classify(spec: ModelSpec, tables: CharTables | None = None, b: float | None = None,
             simulate_immature: bool = False) -> StabilityReport:
    """Combine the local criterion, Delta(m) < m and the immature threshold into one verdict.

    With ``simulate_immature`` the m = 0 system is also run from constant data
    over 50 delays and the decay of x and y is recorded.
    """
    tables = tables if tables is not None else CharTables(spec)
    lc = local_criterion(spec, tables)
    dc = tables.delta_check
    params = ImmatureParams.from_model(spec, tables)
    st = classify_stability(params)
    try:
        root = characteristic_root(params).dominant_real_part
    except Exception:  # the verdict does not depend on the root scan
        root = math.nan
    immature = {"verdict": st.verdict, "margin": st.margin, "dominant_root": root,
                "xi_bar0": params.xi_bar0, "rho": params.rho, "eta": params.eta, "r": params.r}
    schedule = None
    if b is not None and dc.holds:
        sc = tables.schedule(b)
        schedule = {"b": b, "b_seq": list(sc.b_seq), "N": sc.N, "t_bar": sc.t_bar, "t_full": sc.t_full}
    report = StabilityReport(lc, {"holds": dc.holds, "witness": dc.witness, "origin_slope": dc.origin_slope},
                             immature, combine(lc.holds, dc.holds, st.margin), schedule)
    if simulate_immature:
        from .immature import simulate

        traj = simulate(params, 1.0, lambda a: np.full(np.shape(a), float(params.f(1.0))), 50 * params.r)
        report.simulation = {
            "x_final_ratio": float(abs(traj.x[-1]) / max(abs(traj.x[0]), 1e-300)),
            "y_final": float(traj.y[-1]),
            "x_persists": x_persists(traj, 1.0),
        }
    return report


# ---------------------------------------------------------------------------
# trajectory indicators
# ---------------------------------------------------------------------------


def x_persists(traj: Trajectory, amplitude: float, windows: int = 10) -> bool:
    """limsup of x over the final ``windows`` delay intervals exceeds 1e-3 max(1, amplitude)."""
    r = traj.params.r
    tail = traj.t >= traj.t[-1] - windows * r
    return bool(np.max(np.abs(traj.x[tail])) > 1e-3 * max(1.0, amplitude))


def converged_limit(traj: Trajectory, tol: float = 1e-8) -> float | None:
    """The limit of x when its relative total variation over the last delay window is below ``tol``."""
    r = traj.params.r
    tail = traj.x[traj.t >= traj.t[-1] - r]
    scale = max(abs(float(tail[-1])), 1e-300)
    if np.sum(np.abs(np.diff(tail))) / scale < tol:
        return float(tail[-1])
    return None


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _data_equal_below(d1: InitialData, d2: InitialData, b: float, tau_max: float, n: int = 257) -> bool:
    m = np.linspace(0.0, b, n)
    mm, aa = np.meshgrid(m, np.linspace(0.0, tau_max, 33), indexing="ij")
    return bool(np.array_equal(np.asarray(d1.mu(m)), np.asarray(d2.mu(m)))
                and np.array_equal(np.asarray(d1.gamma(mm, aa)), np.asarray(d2.gamma(mm, aa))))


@dataclass
class DependenceOutcome:
    """Differences between two runs whose data agree on [0, b].

    Arrays are indexed by the dump times ``t``.  ``tolerance`` is ten times the
    self-convergence error of the first run at the same times.
    """

    t: np.ndarray
    diff_below_gb: np.ndarray
    diff_below_g1: np.ndarray
    diff_all: np.ndarray
    diff_P_below_gb: np.ndarray
    diff_P_all: np.ndarray
    tolerance: np.ndarray
    tolerance_P: np.ndarray
    t_bar: float
    t_full: float
    exact_below_gb: bool
    agree_g1_after_t_bar: bool
    agree_all_after_t_full: bool
    agree_P_after_t_full: bool

    @property
    def passed(self) -> bool:
        return self.exact_below_gb and self.agree_g1_after_t_bar and self.agree_all_after_t_full and self.agree_P_after_t_full

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        out["passed"] = self.passed
        return out


def self_convergence_error(spec, data, T, M, dt, dump_times, tables=None):
    """max-norm difference of N and P between (M, dt) and (M/2, 2 dt) at the dump times.

    The fine run is sampled at the coarse nodes by its own interpolant.
    """
    fine = solver.simulate(spec, data, T, M=M, dt=dt, dump_times=dump_times, tables=tables)
    coarse = solver.simulate(spec, data, T, M=M // 2, dt=2 * fine.dt, dump_times=dump_times, tables=tables)
    eN, eP = [], []
    for t in coarse.t:
        eN.append(np.max(np.abs(fine.sample("N", t, coarse.m) - coarse.N_at(t))))
        eP.append(np.max(np.abs(fine.sample("P", t, coarse.m) - coarse.P_at(t))))
    return fine, np.array(eN), np.array(eP)


def dependence_experiment(spec: ModelSpec, data1: InitialData, data2: InitialData, b: float,
                          T: float | None = None, M: int = 128, dt: float | None = None,
                          tables: CharTables | None = None, n_dumps: int = 41) -> DependenceOutcome:
    """Twin runs from data that agree on [0, b].

    Checks exact agreement of N and P on [0, g(b)] at every dump, agreement on
    [0, g(1)] from t_bar on and on [0, 1] (N and P) from t_full on.
    """
    tables = tables if tables is not None else CharTables(spec)
    if not tables.delta_check.holds:
        raise PreconditionViolated("Delta(m) < m fails")
    if not _data_equal_below(data1, data2, b, spec.tau_max):
        raise PreconditionViolated(f"initial data differ on [0, {b}]")
    sc = tables.schedule(b)
    T = T if T is not None else sc.t_full + 2.0 * spec.tau_max
    # an even number of steps so that the half-resolution run shares the dump times
    dt = T / (2 * max(1, math.ceil(T / (2 * (dt or solver.default_dt(spec))))))
    # dump times that both resolutions hit exactly
    step2 = 2 * dt
    dumps = np.unique(np.round(np.linspace(0.0, T, n_dumps) / step2) * step2)
    dumps = np.unique(np.concatenate([dumps, [round(sc.t_bar / step2 + 0.5) * step2, round(sc.t_full / step2 + 0.5) * step2]]))
    dumps = dumps[dumps <= T + 1e-12]

    run1, errN, errP = self_convergence_error(spec, data1, T, M, dt, dumps, tables)
    run2 = solver.simulate(spec, data2, T, M=M, dt=dt, dump_times=dumps, tables=tables)
    m = run1.m
    gb = m <= spec.division.g(b)
    g1 = m <= spec.division.g1
    dN = np.abs(run1.N - run2.N)
    dP = np.abs(run1.P - run2.P)
    t = run1.t
    tolN, tolP = 10.0 * errN, 10.0 * errP
    after_bar = t >= sc.t_bar
    after_full = t >= sc.t_full
    d_g1 = dN[:, g1].max(axis=1)
    d_all = dN.max(axis=1)
    dP_all = dP.max(axis=1)
    return DependenceOutcome(
        t, dN[:, gb].max(axis=1), d_g1, d_all, dP[:, gb].max(axis=1), dP_all, tolN, tolP, sc.t_bar, sc.t_full,
        bool(np.all(dN[:, gb] == 0.0) and np.all(dP[:, gb] == 0.0)),
        bool(np.all(d_g1[after_bar] <= tolN[after_bar])),
        bool(np.all(d_all[after_full] <= tolN[after_full])),
        bool(np.all(dP_all[after_full] <= tolP[after_full])),
    )


@dataclass(frozen=True)
class ExtinctionOutcome:
    extinct_by: float
    predicted: float
    passed: bool
    zero_below_gb: bool
    floor: float


def extinction_experiment(spec: ModelSpec, b: float, tail_data: InitialData, T: float | None = None,
                          M: int = 128, dt: float | None = None, tables: CharTables | None = None,
                          floor: float = 1e-8) -> ExtinctionOutcome:
    """Run from data vanishing on [0, b] and find when sup_m N falls below ``floor`` times its initial value.

    Passes when that happens no later than the predicted (N + 3) tau_max - ln h(g(b)).
    """
    tables = tables if tables is not None else CharTables(spec)
    if not tables.delta_check.holds:
        raise PreconditionViolated("Delta(m) < m fails")
    zero = InitialData(lambda m: 0.0 * np.asarray(m, float), lambda m, a: 0.0 * np.asarray(m, float) * np.asarray(a, float))
    if not _data_equal_below(tail_data, zero, b, spec.tau_max):
        raise PreconditionViolated(f"initial data do not vanish on [0, {b}]")
    sc = tables.schedule(b)
    predicted = sc.t_full
    T = T if T is not None else predicted + spec.tau_max
    sol = solver.simulate(spec, tail_data, T, M=M, dt=dt, tables=tables, dump_times="all")
    sup = sol.sup_history[:, 1]
    gb = sol.m <= spec.division.g(b)
    zero_ok = bool(np.all(sol.N[:, gb] == 0.0))
    if sup[0] == 0.0:
        return ExtinctionOutcome(0.0, predicted, True, zero_ok, floor)
    below = np.nonzero(sup <= floor * sup[0])[0]
    when = float(sol.sup_history[below[0], 0]) if below.size else math.inf
    return ExtinctionOutcome(when, predicted, bool(when <= predicted), zero_ok, floor)


def schedule_or_none(tables: CharTables, b: float):
    try:
        return tables.schedule(b)
    except DomainError:
        return None
