"""Time stepping of the integrated formulation for N(t, m) and P(t, m).

Each step restarts the variation-of-constants formula at the current time and
follows the characteristic through every grid node back over one step:

    N(t+dt, m) = K(dt, m) N(t, chi(-dt, m))
                 - int_0^dt K(dt-s, m) [x beta(c, x)](N(t+s, c)) ds
                 + int_0^dt K(dt-s, m) F(t+s, c, N(t+s-tau(Delta(c)), Delta(c))) ds,
    c = chi(-(dt-s), m),

and similarly for P with H, Theta and G.  The s-integrals use two-point
Gauss-Legendre quadrature.  Values along the characteristic inside the step are
linear in time between the foot value and the new node value, which makes the
implicit loss term a scalar fixed point per node.  Retarded values come from a
ring buffer of snapshots: cubic Lagrange in time, cubic Hermite in u = h(m)
across nodes.

The grid is uniform in u = h(m), so backward characteristics are uniform
contractions of u.  Node 0 (m = 0) is stationary and is taken from the
immature-cell delay equation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .characteristics import CharTables
from .immature import ImmatureParams, Trajectory, simulate as simulate_immature
from .model import InitialData, ModelSpec

log = logging.getLogger(__name__)

_GX, _GW = np.polynomial.legendre.leggauss(2)
_LAMBDA = 0.5 * (_GX + 1.0)
_WEIGHT = 0.5 * _GW
FP_MAX_ITER = 5
FP_TOL = 1e-15


class FixedPointDivergence(RuntimeError):
    """The per-step fixed point for the loss term is not contracting."""


class HistoryUnderflow(RuntimeError):
    """A retarded read falls outside the stored history."""


# ---------------------------------------------------------------------------
# source terms
# ---------------------------------------------------------------------------


def F_term(tables: CharTables, data: InitialData, t, m, x):
    """Division source entering the resting phase.

    Inside the initial layer (t <= tau(Delta(m))) cells come from the initial
    proliferating population; afterwards from resting cells that entered the
    cycle tau(Delta(m)) earlier, with value ``x`` of N at that time and maturity.
    """
    spec = tables.spec
    t, m, x = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, m, x)))
    D = tables.delta(m)
    tau = spec.delay(D)
    out = 2.0 * np.asarray(tables.xi_bar(m)) * spec.reentry.flux(D, x)
    layer = t <= tau
    if np.any(layer):
        tl, ml = t[layer], m[layer]
        foot = tables.chi(-tl, spec.division.g_inv(ml))
        out[layer] = 2.0 * np.asarray(tables.xi(tl, ml)) * np.asarray(data.gamma(foot, tau[layer] - tl))
    return out if out.ndim else float(out)


def G_term(tables: CharTables, data: InitialData, t, m, x):
    """Exit flux from the proliferating phase; same structure as F with Theta, pi and no factor 2."""
    spec = tables.spec
    t, m, x = np.broadcast_arrays(*(np.asarray(v, float) for v in (t, m, x)))
    T = tables.theta(m)
    tau = spec.delay(T)
    out = np.asarray(tables.pi_bar(m)) * spec.reentry.flux(T, x)
    layer = t <= tau
    if np.any(layer):
        tl, ml = t[layer], m[layer]
        out[layer] = np.asarray(tables.pi(tl, ml)) * np.asarray(data.gamma(tables.chi(-tl, ml), tau[layer] - tl))
    return out if out.ndim else float(out)


def branch_jump(tables: CharTables, data: InitialData, m):
    """|F_layer - F_delayed| at t = tau(Delta(m)), where the retarded value is mu(Delta(m))."""
    spec = tables.spec
    m = np.asarray(m, float)
    D = tables.delta(m)
    tau = spec.delay(D)
    layer = 2.0 * np.asarray(tables.xi(tau, m)) * np.asarray(data.gamma(tables.chi(-tau, spec.division.g_inv(m)), 0.0 * m))
    delayed = 2.0 * np.asarray(tables.xi_bar(m)) * spec.reentry.flux(D, data.mu(D))
    return np.abs(layer - delayed)


# ---------------------------------------------------------------------------
# grid and history
# ---------------------------------------------------------------------------


def hermite_slopes(v, u, kink: int | None = None):
    """Left and right derivatives d/du at the nodes for cubic Hermite interpolation.

    An interval [u_k, u_k+1] uses the right derivative at k and the left
    derivative at k+1.  Left derivatives are backward three-point differences
    and right derivatives centred ones, so an interpolated value on [u_k, u_k+1]
    never depends on nodes above k+1: every node update only sees maturities
    at or below it, as the characteristics do.  Both are second order; the
    first two nodes fall back to two-point differences.  At the ``kink`` node
    the right derivative is a forward difference and the node above it uses
    its centred derivative on both sides.  Works along the last axis.
    """
    v = np.asarray(v, float)
    h = np.diff(u)
    left = np.empty_like(v)
    right = np.empty_like(v)
    slope0 = (v[..., 1] - v[..., 0]) / h[0]
    left[..., 0] = right[..., 0] = slope0
    left[..., 1] = slope0
    left[..., 2:] = -_one_sided(v[..., 2:], v[..., 1:-1], v[..., :-2], h[1:], h[:-1])
    hl, hr = h[:-1], h[1:]
    right[..., 1:-1] = (hl**2 * (v[..., 2:] - v[..., 1:-1]) + hr**2 * (v[..., 1:-1] - v[..., :-2])) / (hl * hr * (hl + hr))
    right[..., -1] = left[..., -1]
    if kink is not None:
        k = kink
        right[..., k] = _one_sided(v[..., k], v[..., k + 1], v[..., k + 2], h[k], h[k + 1])
        left[..., k + 1] = right[..., k + 1]
    return left, right


def _one_sided(v0, v1, v2, h0, h1):
    """Second-order derivative at x0 from values at x0, x0 + h0, x0 + h0 + h1 (h may be negative)."""
    return (-(2 * h0 + h1) * h1 * v0 + (h0 + h1) ** 2 * v1 - h0**2 * v2) / (h0 * h1 * (h0 + h1))


def hermite_weights(q, u):
    """Interval index and cubic Hermite weights (values, scaled slopes) for points ``q``."""
    q = np.clip(np.asarray(q, float), u[0], u[-1])
    k = np.clip(np.searchsorted(u, q, side="right") - 1, 0, len(u) - 2)
    width = u[k + 1] - u[k]
    z = (q - u[k]) / width
    z2, z3 = z * z, z * z * z
    w = np.stack([2 * z3 - 3 * z2 + 1, (z3 - 2 * z2 + z) * width, -2 * z3 + 3 * z2, (z3 - z2) * width], axis=-1)
    return k, w


def hermite_eval(values, left, right, k, w):
    return w[..., 0] * values[..., k] + w[..., 1] * right[..., k] + w[..., 2] * values[..., k + 1] + w[..., 3] * left[..., k + 1]


def lagrange_lag_weights(lag):
    """Cubic Lagrange weights in time for a read ``lag`` steps back (lag >= 1).

    Returns integer lags (k-1, k, k+1, k+2) with k = floor(lag) and their weights.
    """
    lag = np.asarray(lag, float)
    k = np.floor(lag).astype(int)
    nodes = k[..., None] + np.arange(-1, 3)
    w = np.ones(nodes.shape)
    for i in range(4):
        for j in range(4):
            if i != j:
                w[..., i] *= (lag - nodes[..., j]) / (nodes[..., i] - nodes[..., j])
    return nodes, w


@dataclass
class MaturityGrid:
    """Nodes m_j = h^{-1}(u_j), j = 0..M, with per-node cached characteristic data.

    The u_j are uniform on [0, h(g(1))] and on [h(g(1)), 1] (two pieces with
    nearly equal spacing), so that the maturity g(1), above which no daughter
    cells arrive and the fields have a kink, is a node.
    """

    M: int
    u: np.ndarray
    m: np.ndarray
    kink: int | None
    theta: np.ndarray
    delta: np.ndarray
    tau_delta: np.ndarray
    tau_theta: np.ndarray
    xi_bar: np.ndarray
    pi_bar: np.ndarray

    @classmethod
    def build(cls, tables: CharTables, M: int) -> "MaturityGrid":
        if M < 8:
            raise ValueError("need at least 8 maturity cells")
        g1 = float(tables.spec.division.g1)
        ug = float(tables.h(g1)) if 0 < g1 < 1 else 1.0
        M1 = int(round(M * ug))
        if 2 <= M1 <= M - 2:
            u = np.concatenate([np.linspace(0.0, ug, M1 + 1), np.linspace(ug, 1.0, M - M1 + 1)[1:]])
            kink = M1
        else:
            u = np.arange(M + 1) / M
            kink = None
        m = np.asarray(tables.h_inv(u), float)
        m[0], m[-1] = 0.0, 1.0
        if kink is not None:
            m[kink] = g1
        th, de = tables.theta(m), tables.delta(m)
        d = tables.spec.delay
        return cls(M, u, m, kink, th, de, d(de), d(th), np.asarray(tables.xi_bar(m)), np.asarray(tables.pi_bar(m)))

    def slopes(self, v):
        return hermite_slopes(v, self.u, self.kink)

    def weights(self, q):
        return hermite_weights(q, self.u)


class SpaceTimeHistory:
    """Ring buffer of N snapshots with stored Hermite slopes.

    Slots for negative times hold mu, which is the constant extension of N to
    [-tau_max, 0].
    """

    def __init__(self, grid: MaturityGrid, mu_nodes: np.ndarray, depth: int):
        self.grid = grid
        self.depth = depth
        left, right = grid.slopes(mu_nodes)
        self.values = np.tile(mu_nodes, (depth, 1))
        self.left = np.tile(left, (depth, 1))
        self.right = np.tile(right, (depth, 1))
        self.n = 0

    def push(self, v):
        self.n += 1
        slot = self.n % self.depth
        self.values[slot] = v
        self.left[slot], self.right[slot] = self.grid.slopes(v)

    def current(self):
        slot = self.n % self.depth
        return self.values[slot], self.left[slot], self.right[slot]

    def read(self, lags, lag_w, k, w):
        """Cubic-in-time, Hermite-in-space read of N at fixed relative offsets."""
        if lags.size == 0:
            return np.zeros(lags.shape[:-1])
        if np.max(lags) >= self.depth - 1:
            raise HistoryUnderflow("retarded read beyond buffer depth")
        slots = (self.n - lags) % self.depth
        kk = np.broadcast_to(k[..., None], slots.shape)
        ww = np.broadcast_to(w[..., None, :], slots.shape + (4,))
        vals = (ww[..., 0] * self.values[slots, kk] + ww[..., 1] * self.right[slots, kk]
                + ww[..., 2] * self.values[slots, kk + 1] + ww[..., 3] * self.left[slots, kk + 1])
        return np.sum(lag_w * vals, axis=-1)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------


@dataclass
class FieldSolution:
    """Snapshots of N and P on the maturity grid at the dump times.

    ``sup_history`` holds (t, sup_m |N(t, .)|) at every step.
    """

    spec: ModelSpec
    grid: MaturityGrid
    dt: float
    t: np.ndarray
    N: np.ndarray
    P: np.ndarray
    boundary: Trajectory
    sup_history: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def m(self) -> np.ndarray:
        return self.grid.m

    def index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[i] - t) > 0.5 * self.dt + 1e-12:
            raise KeyError(f"no snapshot at t={t}")
        return i

    def N_at(self, t: float) -> np.ndarray:
        return self.N[self.index(t)]

    def P_at(self, t: float) -> np.ndarray:
        return self.P[self.index(t)]

    def sample(self, which: str, t: float, m):
        """Cubic Hermite interpolation of a snapshot in h-space."""
        tables = self.diagnostics.get("_tables")
        v = (self.N if which == "N" else self.P)[self.index(t)]
        u = tables.h(np.asarray(m, float)) if tables is not None else np.interp(m, self.grid.m, self.grid.u)
        k, w = self.grid.weights(u)
        return hermite_eval(v, *self.grid.slopes(v), k, w)


def default_dt(spec: ModelSpec, per_delay: int = 32) -> float:
    """tau_min / per_delay, capped so that the loss fixed point contracts strongly.

    The cap uses the Lipschitz bound sup beta0 (1 + n/4) of x beta(m, x).
    """
    L = spec.reentry.beta0.sup() * (1.0 + spec.reentry.n / 4.0)
    return min(spec.tau_min / per_delay, 0.25 / L)


class _PointSet:
    """Quadrature points s in [0, dt] along the characteristics of selected nodes.

    Caches everything that depends only on the position relative to the step:
    the point c on the characteristic, the survival kernel, the retarded
    maturity (Delta or Theta of c), its delay and the read weights.
    """

    def __init__(self, tables: CharTables, grid: MaturityGrid, dt: float, rows, s, w, kind: str):
        spec = tables.spec
        rr = spec.reentry
        self.kind, self.rows, self.s, self.w = kind, rows, s, w
        m = grid.m[1:][rows][:, None]
        c = tables.chi(-(dt - s), m)
        self.c = c
        if kind == "F":
            self.kern = np.asarray(tables.kernel_K(dt - s, m))
            X = tables.delta(c)
            self.coef = 2.0 * np.asarray(tables.xi_bar(c))
            self.g_inv_c = spec.division.g_inv(c)
        else:
            self.kern = np.asarray(tables.kernel_H(dt - s, m))
            X = tables.theta(c)
            self.coef = np.asarray(tables.pi_bar(c))
            self.g_inv_c = c
        self.tau = spec.delay(X)
        self.b0, self.th = rr.beta0(X), rr.theta(X)
        self.k, self.wx = grid.weights(tables.h(X))
        lag = (self.tau - s) / dt
        if lag.size and lag.min() < 1.0:
            raise ValueError("time step too large: retarded reads must lie at least one step back")
        self.lags, self.lw = lagrange_lag_weights(lag)
        self.max_lag = int(self.lags.max()) if lag.size else 0
        self.layer_end = float(self.tau.max()) if lag.size else 0.0

    def integrate(self, stepper: "Stepper", t_n: float):
        """Sum over points of weight * kernel * (F or G), one value per row."""
        x = stepper.history.read(self.lags, self.lw, self.k, self.wx)
        val = self.coef * x * (self.b0 / (1.0 + np.power(np.abs(x) / self.th, stepper.nexp)))
        if t_n <= self.layer_end:
            t = np.broadcast_to(t_n + self.s, self.c.shape)
            lay = t <= self.tau
            if np.any(lay):
                val[lay] = stepper.layer_source(self.kind, t[lay], self.c[lay], self.g_inv_c[lay], self.tau[lay])
        return np.sum(self.w * self.kern * val, axis=1)


class Stepper:
    """Advances (N, P) on a fixed grid with a fixed step.

    Node 0 is not computed here: the caller supplies the m = 0 values at each
    step (see :func:`simulate`).
    """

    def __init__(self, tables: CharTables, data: InitialData, M: int, dt: float):
        spec = tables.spec
        if dt > 0.5 * spec.tau_min:
            raise ValueError(f"dt={dt} exceeds half the minimal delay {spec.tau_min}")
        self.tables, self.data, self.dt = tables, data, dt
        self.grid = grid = MaturityGrid.build(tables, M)
        self.nexp = spec.reentry.n
        rows = np.arange(M)
        mj = grid.m[1:]
        s = dt * np.broadcast_to(_LAMBDA, (M, 2))
        w = dt * np.broadcast_to(_WEIGHT, (M, 2))

        # the loss term and the proliferating exit flux use plain Gauss points
        self.loss_c = tables.chi(-(dt - s), mj[:, None])
        self.loss_K = np.asarray(tables.kernel_K(dt - s, mj[:, None]))
        self.loss_H = np.asarray(tables.kernel_H(dt - s, mj[:, None]))
        self.loss_b0, self.loss_th = spec.reentry.beta0(self.loss_c), spec.reentry.theta(self.loss_c)
        self.loss_w = w
        self.G = _PointSet(tables, grid, dt, rows, s, w, "G")

        # the division source vanishes above g(1): integrate only up to the crossing
        g1 = float(spec.division.g1)
        self.log_g1 = float(tables.log_h(g1))
        s_end = np.where(mj > g1, np.clip(dt - (tables.log_h(mj) - self.log_g1), 0.0, dt), dt)
        self.F_end = s_end
        self.F = _PointSet(tables, grid, dt, rows, s_end[:, None] * _LAMBDA, s_end[:, None] * _WEIGHT, "F")

        self.foot_k, self.foot_w = grid.weights(grid.u[1:] * math.exp(-dt))
        self.K_foot = np.asarray(tables.kernel_K(dt, mj))
        self.H_foot = np.asarray(tables.kernel_H(dt, mj))
        # covers [t - tau_max - dt, t] plus the cubic stencil
        self.depth = max(self.F.max_lag + 4, int(math.ceil(tables.spec.tau_max / dt)) + 2)
        self.layer_end = max(self.F.layer_end, self.G.layer_end)
        self.history = None
        self.P = None
        self.n = 0
        self.max_iter = 0
        self.layer_splits = 0

    def start(self, N0, P0):
        self.history = SpaceTimeHistory(self.grid, np.asarray(N0, float), self.depth)
        self.P = np.asarray(P0, float).copy()
        self.n = 0

    @property
    def t(self) -> float:
        return self.n * self.dt

    def layer_source(self, kind, t, c, g_inv_c, tau):
        """Initial-layer branch of F (kind "F") or G at absolute times ``t``."""
        tb, gam = self.tables, self.data.gamma
        if kind == "F":
            return 2.0 * np.asarray(tb.xi(t, c)) * np.asarray(gam(tb.chi(-t, g_inv_c), tau - t))
        return np.asarray(tb.pi(t, c)) * np.asarray(gam(tb.chi(-t, c), tau - t))

    def _split_layer(self, ps: _PointSet, s_end, t_n, base):
        """Re-integrate rows whose characteristic leaves the initial layer inside the step."""
        tb = self.tables
        spec = tb.spec
        mj = self.grid.m[1:]
        retarded = tb.delta if ps.kind == "F" else tb.theta

        def gap(s, m):
            return spec.delay(retarded(tb.chi(-(self.dt - s), m))) - (t_n + s)

        ends = np.asarray(s_end, float)
        live = ends > 0
        g0 = np.where(live, gap(np.zeros_like(ends), mj), -1.0)
        g1 = np.where(live, gap(ends, mj), 1.0)
        rows = np.nonzero((g0 > 0) & (g1 < 0))[0]
        if rows.size == 0:
            return base
        lo, hi, m = np.zeros(rows.size), ends[rows].copy(), mj[rows]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            pos = gap(mid, m) > 0
            lo, hi = np.where(pos, mid, lo), np.where(pos, hi, mid)
        sc = 0.5 * (lo + hi)
        out = base.copy()
        total = np.zeros(rows.size)
        for a, b in ((np.zeros_like(sc), sc), (sc, ends[rows])):
            half = 0.5 * (b - a)
            pts = a[:, None] + half[:, None] * (_GX[None, :] + 1.0)
            part = _PointSet(tb, self.grid, self.dt, rows, pts, half[:, None] * _GW[None, :], ps.kind)
            total += part.integrate(self, t_n)
        out[rows] = total
        self.layer_splits += rows.size
        return out

    def advance(self, N0_next: float, P0_next: float):
        """One step; ``N0_next``, ``P0_next`` are the m = 0 values at the new time."""
        dt, t_n, nexp = self.dt, self.t, self.nexp
        N_foot = hermite_eval(*self.history.current(), self.foot_k, self.foot_w)
        P_foot = hermite_eval(self.P, *self.grid.slopes(self.P), self.foot_k, self.foot_w)

        F_int = self.F.integrate(self, t_n)
        G_int = self.G.integrate(self, t_n)
        if t_n <= self.layer_end:
            F_int = self._split_layer(self.F, self.F_end, t_n, F_int)
            G_int = self._split_layer(self.G, np.full(self.grid.M, dt), t_n, G_int)

        base = self.K_foot * N_foot + F_int

        def along(N_new):
            x = (1.0 - _LAMBDA) * N_foot[:, None] + _LAMBDA * N_new[:, None]
            return x * (self.loss_b0 / (1.0 + np.power(np.abs(x) / self.loss_th, nexp)))

        N_new = base - np.sum(self.loss_w * self.loss_K * along(N_foot), axis=1)
        prev = math.inf
        it = 0
        for it in range(1, FP_MAX_ITER + 1):
            cand = base - np.sum(self.loss_w * self.loss_K * along(N_new), axis=1)
            change = float(np.max(np.abs(cand - N_new)))
            N_new = cand
            if change <= FP_TOL * (1.0 + float(np.max(np.abs(N_new)))):
                break
            if change > prev and change > 1e-10:
                raise FixedPointDivergence(f"fixed point diverging at t={t_n + dt:.6g} (change {change:.3g})")
            prev = change
        self.max_iter = max(self.max_iter, it)

        P_new = self.H_foot * P_foot + np.sum(self.loss_w * self.loss_H * along(N_new), axis=1) - G_int
        N_full = np.concatenate([[N0_next], N_new])
        self.P = np.concatenate([[P0_next], P_new])
        self.history.push(N_full)
        self.n += 1
        return N_full, self.P


def simulate(spec: ModelSpec, data: InitialData, T: float, M: int = 128, dt: float | None = None,
             dump_times=None, tables: CharTables | None = None, immature_kw: dict | None = None) -> FieldSolution:
    """Run the structured model from t = 0 to ``T``.

    Parameters
    ----------
    M : int
        Number of maturity cells (M + 1 nodes including m = 0).
    dt : float, optional
        Requested step; the step actually used divides ``T`` exactly.
    dump_times : sequence of float or "all", optional
        Times at which snapshots are kept (rounded to the step grid).  Defaults
        to (0, T).
    """
    if not T > 0:
        raise ValueError("horizon must be positive")
    tables = tables if tables is not None else CharTables(spec)
    data = data.validate(spec.tau_max)
    steps = max(1, int(math.ceil(T / (dt or default_dt(spec)) - 1e-9)))
    dt = T / steps
    stepper = Stepper(tables, data, M, dt)
    grid = stepper.grid

    if dump_times is None:
        dump_steps = {0, steps}
    elif isinstance(dump_times, str) and dump_times == "all":
        dump_steps = set(range(steps + 1))
    else:
        dump_steps = {min(steps, max(0, int(round(float(t) / dt)))) for t in dump_times}

    params = ImmatureParams.from_model(spec, tables)
    boundary = simulate_immature(params, float(data.mu(0.0)), lambda a: data.gamma(0.0 * np.asarray(a, float), a),
                                 max(T, params.r) + params.r, dt_out=dt, **(immature_kw or {}))
    times = dt * np.arange(steps + 1)
    x_b, y_b = boundary.x_at(times), boundary.y_at(times)

    N0 = np.asarray(data.mu(grid.m), float).copy()
    P0 = np.asarray(data.gamma_bar(grid.m, grid.tau_theta), float)
    N0[0], P0[0] = x_b[0], y_b[0]
    stepper.start(N0, P0)

    out_t, out_N, out_P = [], [], []
    if 0 in dump_steps:
        out_t.append(0.0)
        out_N.append(N0.copy())
        out_P.append(P0.copy())
    sup_hist = np.empty((steps + 1, 2))
    sup_hist[0] = (0.0, np.max(np.abs(N0)))
    min_val = float(min(N0.min(), P0.min()))
    for n in range(steps):
        N, P = stepper.advance(x_b[n + 1], y_b[n + 1])
        sup_hist[n + 1] = (times[n + 1], np.max(np.abs(N)))
        min_val = min(min_val, float(N.min()), float(P.min()))
        if n + 1 in dump_steps:
            out_t.append(times[n + 1])
            out_N.append(N.copy())
            out_P.append(P.copy())

    scale = max(float(np.max(sup_hist[:, 1])), 1e-300)
    if min_val < -1e-3 * scale:
        log.warning("negative values down to %.3g in the computed field (sup %.3g)", min_val, scale)
    elif min_val < 0:
        log.info("interpolation undershoot %.3g (sup %.3g)", min_val, scale)
    jumps = branch_jump(tables, data, grid.m[1:])
    diagnostics = {
        "steps": steps,
        "max_fixed_point_iterations": stepper.max_iter,
        "layer_splits": stepper.layer_splits,
        "min_value": min_val,
        "max_branch_jump": float(np.max(jumps)) if jumps.size else 0.0,
        "history_depth": stepper.depth,
        "_tables": tables,
    }
    return FieldSolution(spec, grid, dt, np.array(out_t), np.array(out_N), np.array(out_P), boundary, sup_hist, diagnostics)


def advance(stepper: Stepper, N0_next: float, P0_next: float):
    """Advance a started :class:`Stepper` by one step and return the new (N, P) snapshot."""
    return stepper.advance(N0_next, P0_next)
