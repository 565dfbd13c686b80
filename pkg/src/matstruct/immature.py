"""The immature-cell (m = 0) subsystem.

At m = 0 the structured model collapses to a scalar delay differential equation for
the resting density x(t) and an explicitly integrable proliferating density y(t):

    x'(t) = -(rho + beta(x(t))) x(t) + 2 xi_bar0 beta(x(t-r)) x(t-r),         t >= r
    y(t)  = int_{t-r}^t exp(-eta (t-s)) beta(x(s)) x(s) ds,                   t >= r

with an ODE initial phase on [0, r] driven by the proliferating age profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .model import hill

RTOL = 1e-8
ATOL = 1e-10

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


class StepSizeUnderflow(RuntimeError):
    """The adaptive integrator could not advance."""


class SearchInconclusive(RuntimeError):
    """The complex root search could not certify its count."""


@dataclass(frozen=True)
class ImmatureParams:
    """Constants of the m = 0 system.

    ``xi_bar0`` and ``pi_bar0`` are the survival rates after one full cycle; the
    time-dependent rates of the initial phase follow from them as
    xi(t, 0) = xi_bar0 exp(eta (r - t)).
    """

    rho: float
    eta: float
    r: float
    xi_bar0: float
    pi_bar0: float
    beta0: float = 1.0
    theta: float = 1.0
    n: float = 2.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("delay r must be positive")
        if self.rho < 0 or self.eta < 0:
            raise ValueError("rho and eta must be nonnegative")
        if not (self.xi_bar0 > 0 and self.pi_bar0 > 0):
            raise ValueError("xi_bar0 and pi_bar0 must be positive")

    @classmethod
    def from_model(cls, spec, tables=None) -> "ImmatureParams":
        from .characteristics import CharTables

        tables = tables if tables is not None else CharTables(spec)
        rr = spec.reentry
        return cls(
            rho=spec.rho,
            eta=spec.eta,
            r=spec.r,
            xi_bar0=float(tables.xi_bar(0.0)),
            pi_bar0=float(tables.pi_bar(0.0)),
            beta0=float(rr.beta0(0.0)),
            theta=float(rr.theta(0.0)),
            n=float(rr.n),
        )

    def beta(self, x):
        return hill(self.beta0, self.theta, self.n, x)

    def f(self, x):
        """x beta(0, x)."""
        return x * self.beta(x)

    def xi0(self, t):
        return self.xi_bar0 * np.exp(self.eta * (self.r - np.asarray(t, float)))

    def pi0(self, t):
        return self.pi_bar0 * np.exp(self.eta * (self.r - np.asarray(t, float)))

    @property
    def margin(self) -> float:
        """rho - (2 xi_bar0 - 1) beta(0, 0); positive iff the trivial solution is globally stable."""
        return self.rho - (2.0 * self.xi_bar0 - 1.0) * self.beta0

    @property
    def x_bar(self) -> float:
        """Point after which x beta(0, x) decreases (Hill exponent n > 1)."""
        if self.n <= 1:
            return math.inf
        return self.theta / (self.n - 1.0) ** (1.0 / self.n)


def _ivp(rhs, span, z0, rtol, atol):
    sol = integrate.solve_ivp(rhs, span, z0, method="RK45", dense_output=True, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise StepSizeUnderflow(sol.message)
    return sol


@dataclass
class InitialPhase:
    """Solution (phi, psi) of the m = 0 system on [0, r]."""

    params: ImmatureParams
    sol: object
    gamma0: Callable
    mu0: float
    gamma_bar0: float

    def phi(self, t):
        t = np.asarray(t, float)
        return self.sol.sol(t.ravel())[0].reshape(t.shape)

    def psi(self, t):
        """Explicit representation: decayed initial cohort plus integrated inflow."""
        p = self.params
        t = np.atleast_1d(np.asarray(t, float))
        rem = p.r - t
        a = 0.5 * rem[:, None] * (_GL_X[None, :] + 1.0)
        cohort = 0.5 * rem * (np.asarray(self.gamma0(a)) @ _GL_W)
        s = 0.5 * t[:, None] * (_GL_X[None, :] + 1.0)
        inflow = 0.5 * t * ((np.exp(-p.eta * (t[:, None] - s)) * p.f(self.phi(s))) @ _GL_W)
        return np.exp(-p.eta * t) * cohort + inflow


def solve_initial_phase(params: ImmatureParams, mu0: float, gamma0: Callable, xi0=None, pi0=None,
                        rtol: float = RTOL, atol: float = ATOL) -> InitialPhase:
    """Integrate phi' = -(rho + beta(phi)) phi + 2 xi0(t) Gamma0(r - t) on [0, r].

    ``gamma0`` is the age profile a -> Gamma(0, a) (vectorised).  psi is carried
    along as an ODE state and is also available through its explicit formula.
    """
    p = params
    xi0 = xi0 or p.xi0
    pi0 = pi0 or p.pi0
    gbar = float(integrate.quad(lambda a: float(gamma0(a)), 0.0, p.r, epsabs=1e-14, epsrel=1e-12, limit=200)[0])

    def rhs(t, z):
        phi, psi = z
        g = float(gamma0(p.r - t))
        return [-(p.rho + p.beta(phi)) * phi + 2.0 * float(xi0(t)) * g,
                -p.eta * psi + p.f(phi) - float(pi0(t)) * g]

    sol = _ivp(rhs, (0.0, p.r), [float(mu0), gbar], rtol, atol)
    return InitialPhase(p, sol, gamma0, float(mu0), gbar)


@dataclass
class Trajectory:
    """Samples of (x, y) on a uniform grid plus the piecewise dense solution.

    ``y`` uses the explicit integral representation, ``y_ode`` the directly
    integrated equation.  Between samples, :meth:`interpolate` uses cubic Hermite
    interpolation on (x, dx).
    """

    params: ImmatureParams
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dx: np.ndarray
    y_ode: np.ndarray
    segments: list = field(repr=False)
    phase: InitialPhase = field(repr=False)
    jump_at_r: bool = False

    def x_at(self, t):
        return self._dense(t, 0)

    def y_ode_at(self, t):
        return self._dense(t, 1)

    def _dense(self, t, comp):
        t = np.asarray(t, float)
        flat = t.ravel()
        r = self.params.r
        k = np.clip(np.floor(flat / r).astype(int), 0, len(self.segments) - 1)
        out = np.empty_like(flat)
        for seg in np.unique(k):
            mask = k == seg
            out[mask] = self.segments[seg](flat[mask])[comp]
        return out.reshape(t.shape)

    def y_at(self, t):
        """y(t) from its explicit representation."""
        p = self.params
        t = np.atleast_1d(np.asarray(t, float))
        out = np.empty_like(t)
        early = t <= p.r
        if np.any(early):
            out[early] = self.phase.psi(t[early])
        late = ~early
        if np.any(late):
            out[late] = _window_integral(self, t[late], lambda s, tt: np.exp(-p.eta * (tt - s)) * p.f(self.x_at(s)))
        return out

    def interpolate(self, t):
        from scipy.interpolate import CubicHermiteSpline

        return CubicHermiteSpline(self.t, self.x, self.dx)(t)

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0])


def _window_integral(traj: Trajectory, t, integrand):
    """int_{t-r}^t integrand(s, t) ds split at the breakpoint inside the window."""
    r = traj.params.r
    k = np.floor(t / r + 1e-12)
    bp = np.clip(k * r, t - r, t)
    total = np.zeros_like(t)
    for a, b in ((t - r, bp), (bp, t)):
        half = 0.5 * (b - a)
        s = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        total += half * (integrand(s, t[:, None]) @ _GL_W)
    return total


def solve_dde(params: ImmatureParams, phase: InitialPhase, T: float, dt_out: float | None = None,
              rtol: float = RTOL, atol: float = ATOL, compat_tol: float = 1e-9) -> Trajectory:
    """Method of steps on [r, 2r], [2r, 3r], ...; each step restarts at the breakpoint.

    The delayed argument is always read from the dense output of the previous
    segment.  Samples are returned on a uniform grid of spacing ``dt_out``
    (default r/40, adjusted so that r is a grid point).
    """
    p = params
    r = p.r
    if not T > r:
        raise ValueError("horizon must exceed the delay r")
    segments = [phase.sol.sol]
    t0 = r
    z0 = phase.sol.sol(r)
    while t0 < T - 1e-12 * T:
        t1 = min(t0 + r, T)
        prev = segments[-1]

        def rhs(t, z, prev=prev):
            fd = p.f(prev(t - r)[0])
            x, y = z
            return [-(p.rho + p.beta(x)) * x + 2.0 * p.xi_bar0 * fd, -p.eta * y + p.f(x) - p.pi_bar0 * fd]

        sol = _ivp(rhs, (t0, t1), z0, rtol, atol)
        segments.append(sol.sol)
        z0 = sol.y[:, -1]
        t0 = t1

    per = max(1, int(round(r / (dt_out or r / 40.0))))
    h = r / per
    n = int(math.floor(T / h + 1e-9))
    t = h * np.arange(n + 1)
    traj = Trajectory(p, t, np.empty(0), np.empty(0), np.empty(0), np.empty(0), segments, phase)
    x = traj.x_at(t)
    forcing = np.where(
        t < r,
        2.0 * p.xi0(t) * np.asarray(phase.gamma0(np.clip(r - t, 0.0, r))),
        2.0 * p.xi_bar0 * p.f(traj.x_at(np.maximum(t - r, 0.0))),
    )
    traj.x = x
    traj.dx = -(p.rho + p.beta(x)) * x + forcing
    traj.y = traj.y_at(t)
    traj.y_ode = traj.y_ode_at(t)
    traj.jump_at_r = abs(float(phase.gamma0(0.0)) - float(p.f(phase.mu0))) > compat_tol
    return traj


def simulate(params: ImmatureParams, mu0: float, gamma0: Callable, T: float, **kw) -> Trajectory:
    """Initial phase followed by the delay equation up to ``T``."""
    solver_kw = {k: kw[k] for k in ("rtol", "atol") if k in kw}
    phase = solve_initial_phase(params, mu0, gamma0, **solver_kw)
    return solve_dde(params, phase, T, **kw)


def asymptotic_y(params: ImmatureParams, C: float) -> float:
    """Limit of y(t) when x(t) -> C."""
    p = params
    flux = float(p.f(C))
    if p.eta > 0:
        return (1.0 - math.exp(-p.eta * p.r)) / p.eta * flux
    return p.r * flux


# ---------------------------------------------------------------------------
# Lyapunov functional
# ---------------------------------------------------------------------------


def primitive_f(params: ImmatureParams, x):
    """int_0^x s beta(0, s) ds."""
    p = params
    x = np.asarray(x, float)
    if p.n == 2.0:
        out = 0.5 * p.beta0 * p.theta**2 * np.log1p((x / p.theta) ** 2)
    elif p.n == 1.0:
        out = p.beta0 * p.theta * (x - p.theta * np.log1p(x / p.theta))
    else:
        out = np.vectorize(lambda v: integrate.quad(lambda s: float(p.f(s)), 0.0, v, epsrel=1e-12)[0])(x)
    return out if out.ndim else float(out)


def lyapunov_J(params: ImmatureParams, segment) -> float:
    """J(phi) = F(phi(r)) + xi_bar0 int_0^r f(phi(s))^2 ds for a nonnegative segment on [0, r].

    ``segment`` is a vectorised callable on [0, r] or an array of samples on a
    uniform grid of [0, r].
    """
    p = params
    if callable(segment):
        s = 0.5 * p.r * (_GL_X + 1.0)
        integral = 0.5 * p.r * float(p.f(np.asarray(segment(s))) ** 2 @ _GL_W)
        end = float(segment(p.r))
    else:
        vals = np.asarray(segment, float)
        grid = np.linspace(0.0, p.r, len(vals))
        integral = float(integrate.simpson(p.f(vals) ** 2, x=grid))
        end = float(vals[-1])
    return primitive_f(p, end) + p.xi_bar0 * integral


def lyapunov_series(traj: Trajectory, times=None) -> tuple[np.ndarray, np.ndarray]:
    """J evaluated on the history window [t - r, t] of a trajectory for sample times t >= r."""
    p = traj.params
    t = traj.t[traj.t >= p.r - 1e-12] if times is None else np.asarray(times, float)
    integral = _window_integral(traj, t, lambda s, tt: p.f(traj.x_at(s)) ** 2)
    return t, primitive_f(p, traj.x_at(t)) + p.xi_bar0 * integral


def lyapunov_rate(params: ImmatureParams, u):
    """lambda(u) = (rho - (2 xi_bar0 - 1) beta(0, u)) beta(0, u) u^2, a bound on -dJ/dt."""
    p = params
    b = p.beta(u)
    return (p.rho - (2.0 * p.xi_bar0 - 1.0) * b) * b * np.asarray(u, float) ** 2


# ---------------------------------------------------------------------------
# stability of the trivial solution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ImmatureStability:
    verdict: str
    margin: float


def classify_stability(params: ImmatureParams) -> ImmatureStability:
    m = params.margin
    return ImmatureStability("GloballyStable" if m > 0 else "Unstable", m)


@dataclass(frozen=True)
class CharacteristicRoot:
    real_root: float
    dominant_real_part: float
    complex_roots: tuple = ()


def _winding(p, x0, x1, y0, y1, n=256, max_points=2_000_000):
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)]
    z = np.concatenate([np.linspace(a, b, n, endpoint=False) for a, b in zip(corners[:-1], corners[1:])] + [[corners[0]]])
    w = p(z)
    while True:
        if not np.all(np.isfinite(w)) or np.min(np.abs(w)) < 1e-13 * (1.0 + np.max(np.abs(w))):
            raise SearchInconclusive("contour passes through a root")
        d = np.angle(w[1:] / w[:-1])
        coarse = np.nonzero(np.abs(d) >= 0.5)[0]
        if coarse.size == 0:
            break
        if z.size + coarse.size > max_points:
            raise SearchInconclusive("contour resolution exceeded")
        # bisect only the intervals where the phase moves too fast
        zm = 0.5 * (z[coarse] + z[coarse + 1])
        z = np.insert(z, coarse + 1, zm)
        w = np.insert(w, coarse + 1, p(zm))
    total = d.sum() / (2.0 * math.pi)
    k = round(total)
    if abs(total - k) > 1e-3:
        raise SearchInconclusive("non-integer winding number")
    return int(k)


def _locate(p, dp, rect, depth=0):
    x0, x1, y0, y1 = rect
    if _winding(p, *rect) == 0:
        return []
    if depth > 30 or max(x1 - x0, y1 - y0) < 1e-6:
        z = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        for _ in range(50):
            step = p(z) / dp(z)
            z -= step
            if abs(step) < 1e-14 * (1 + abs(z)):
                break
        return [z]
    if x1 - x0 >= y1 - y0:
        xm = x0 + (0.5 + 1e-3) * (x1 - x0)
        halves = [(x0, xm, y0, y1), (xm, x1, y0, y1)]
    else:
        ym = y0 + (0.5 + 1e-3) * (y1 - y0)
        halves = [(x0, x1, y0, ym), (x0, x1, ym, y1)]
    return [z for half in halves for z in _locate(p, dp, half, depth + 1)]


def characteristic_root(params: ImmatureParams) -> CharacteristicRoot:
    """Rightmost root of lam = -(rho + beta(0,0)) + 2 xi_bar0 beta(0,0) exp(-lam r).

    The real root is bracketed and refined; the half-plane to its right is then
    searched for complex roots by argument-principle counts on a rectangle that
    provably contains every root there, subdivided when the count is nonzero.
    """
    p = params
    a = p.rho + p.beta0
    b = 2.0 * p.xi_bar0 * p.beta0
    r = p.r

    def char(lam):
        return lam + a - b * np.exp(-lam * r)

    def dchar(lam):
        return 1.0 + b * r * np.exp(-lam * r)

    if b == 0:
        lam_real = -a
    else:
        # char(-a) = -b exp(a r) < 0 and char(max(b - a, 0)) >= 0.
        lo, hi = -a, max(b - a, 0.0)
        lam_real = hi if char(hi) == 0 else optimize.brentq(char, lo, hi, xtol=1e-15, rtol=1e-15)

    # Any root with Re lam >= s satisfies |Im lam| <= |lam + a| = b exp(-r Re lam) <= b exp(-r s).
    s = lam_real + 1e-3 * (1.0 + abs(lam_real))
    x1 = max(s, 0.0) + abs(a) + b + 1.0
    Y = b * math.exp(-r * s) + abs(a) + 1.0
    found = _locate(char, dchar, (s, x1, -Y, Y))
    dominant = max([lam_real] + [z.real for z in found])
    return CharacteristicRoot(lam_real, dominant, tuple(found))


# ---------------------------------------------------------------------------
# unbounded growth under rho = 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnboundedScenario:
    applies: bool
    reasons: tuple


def unbounded_scenario_check(params: ImmatureParams, mu0: float, gamma0: Callable, xi0=None,
                             n_grid: int = 2001, compat_tol: float = 1e-9) -> UnboundedScenario:
    """Whether the sufficient conditions for an unbounded x(t) hold.

    Requires rho = 0, Hill n > 1, mu(0) above the point where x beta(0,x) starts to
    decrease, the compatibility relation at m = 0 and 2 xi(t,0) Gamma(0, r-t) >
    Gamma(0,0) on [0, r] (checked on a grid).  ``reasons`` lists the failures.
    """
    p = params
    xi0 = xi0 or p.xi0
    reasons = []
    if p.rho != 0:
        reasons.append(f"rho = {p.rho} != 0")
    if p.n <= 1:
        reasons.append("Hill exponent n <= 1: x beta(0,x) never decreases")
    elif not mu0 > p.x_bar:
        reasons.append(f"mu(0) = {mu0} <= x_bar = {p.x_bar}")
    g00 = float(gamma0(0.0))
    if abs(g00 - float(p.f(mu0))) > compat_tol:
        reasons.append("compatibility Gamma(0,0) = beta(0,mu(0)) mu(0) fails")
    t = np.linspace(0.0, p.r, n_grid)
    lhs = 2.0 * np.asarray(xi0(t)) * np.asarray(gamma0(p.r - t))
    if not np.all(lhs > g00):
        reasons.append("2 xi(t,0) Gamma(0,r-t) > Gamma(0,0) fails on [0, r]")
    return UnboundedScenario(not reasons, tuple(reasons))
