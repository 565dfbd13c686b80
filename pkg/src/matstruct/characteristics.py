"""Characteristic curves, commitment maturities, survival kernels and the dependence schedule.

Everything is expressed through ``log_h(m) = -int_m^1 ds / V(s)``: backward
characteristics are translations in ``log_h``, ``chi(s, m) = h^{-1}(h(m) e^s)``.
Power-law velocities use closed forms; other velocities use a log-spaced table of
``log_h`` built by adaptive quadrature.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .model import ModelSpec, PowerLawVelocity, Profile, check_delta_strict


class DomainError(ValueError):
    """Argument outside the set where an operation is defined."""


class QuadratureFailure(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


def _quad(fn, a, b, tol):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, a, b, epsabs=1e-14, epsrel=tol, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from None
    return val


@dataclass(frozen=True)
class PropagationSchedule:
    """Maturity transmission sequence and the times after which two runs must agree."""

    b_seq: tuple
    N: int
    t_bar: float
    t_full: float


class CharTables:
    """Evaluators for h, chi, Theta, Delta and the survival kernels of one model.

    Parameters
    ----------
    spec : ModelSpec
    quad_tol : float
        Relative tolerance of adaptive quadrature.
    root_tol : float
        Tolerance on maturities returned by root finding.
    m_floor : float
        Smallest tabulated maturity for non power-law velocities; below it
        ``log_h`` is continued with its local slope ``m / V(m)``.
    table_size : int
        Number of log-spaced points of the ``log_h`` table.
    """

    def __init__(self, spec: ModelSpec, quad_tol: float = 1e-10, root_tol: float = 1e-10,
                 m_floor: float = 1e-12, table_size: int = 4096):
        self.spec = spec
        self.quad_tol = quad_tol
        self.root_tol = root_tol
        self.m_floor = m_floor
        self._closed = isinstance(spec.velocity, PowerLawVelocity)
        if not self._closed:
            self._build_table(table_size)

    # -- h and its inverse -------------------------------------------------

    def _build_table(self, size):
        V = self.spec.velocity
        ms = np.geomspace(self.m_floor, 1.0, size)
        pieces = np.array([_quad(lambda s: 1.0 / V(s), a, b, self.quad_tol) for a, b in zip(ms[:-1], ms[1:])])
        logh = -np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        self._tab_lnm = np.log(ms)
        self._tab_logh = logh
        self._fwd = PchipInterpolator(self._tab_lnm, logh)
        self._inv = PchipInterpolator(logh, self._tab_lnm)
        self._floor_slope = self.m_floor / float(V(self.m_floor))

    def log_h(self, m):
        """ln h(m) = -int_m^1 ds/V(s); -inf at m = 0."""
        m = np.asarray(m, dtype=float)
        V = self.spec.velocity
        with np.errstate(divide="ignore"):
            if self._closed:
                a, p = V.coefficient, V.exponent
                if p == 1.0:
                    out = np.log(m) / a
                else:
                    out = -(np.power(m, 1.0 - p) - 1.0) / (a * (p - 1.0))
                    out = np.where(m > 0, out, -np.inf)
            else:
                lnm = np.log(np.maximum(m, 1e-300))
                out = np.where(
                    m >= self.m_floor,
                    self._fwd(np.clip(lnm, self._tab_lnm[0], 0.0)),
                    self._tab_logh[0] + self._floor_slope * (lnm - self._tab_lnm[0]),
                )
                out = np.where(m > 0, out, -np.inf)
        return out if m.ndim else float(out)

    def h_inv_log(self, L):
        """The maturity m with ln h(m) = L."""
        L = np.asarray(L, dtype=float)
        V = self.spec.velocity
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if self._closed:
                a, p = V.coefficient, V.exponent
                if p == 1.0:
                    out = np.exp(a * L)
                else:
                    out = np.power(1.0 - a * (p - 1.0) * L, 1.0 / (1.0 - p))
                    out = np.where(np.isneginf(L), 0.0, out)
            else:
                lnm = np.where(
                    L >= self._tab_logh[0],
                    self._inv(np.clip(L, self._tab_logh[0], 0.0)),
                    self._tab_lnm[0] + (L - self._tab_logh[0]) / self._floor_slope,
                )
                out = np.where(np.isneginf(L), 0.0, np.exp(lnm))
        return out if L.ndim else float(out)

    def h(self, m):
        """h(m) = exp(-int_m^1 ds/V(s)), with h(0) = 0."""
        return np.exp(self.log_h(m))

    def h_inv(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return self.h_inv_log(np.log(u))

    def log_h_direct(self, m: float) -> float:
        """ln h(m) by direct adaptive quadrature, bypassing closed forms and tables."""
        if m <= 0:
            return -math.inf
        V = self.spec.velocity
        return -_quad(lambda s: 1.0 / V(s), m, 1.0, self.quad_tol)

    # -- characteristics ---------------------------------------------------

    def chi(self, s, m):
        """chi(s, m) = h^{-1}(h(m) e^s): the maturity at time s <= 0 of the cell at m at time 0."""
        s = np.asarray(s, dtype=float)
        out = self.h_inv_log(self.log_h(m) + s)
        # exp(log m) is off by an ulp; keep chi(0, m) = m and chi(s, m) <= m for s < 0
        m = np.asarray(m, dtype=float)
        out = np.where(s == 0, m, np.where(s < 0, np.minimum(out, m), out))
        return out if out.ndim else float(out)

    def theta(self, m):
        """Commitment maturity: the unique x in (0, m) with x = chi(-tau(x), m)."""
        m = np.asarray(m, dtype=float)
        flat = np.atleast_1d(m).ravel()
        pos = flat > 0
        L = self.log_h(np.where(pos, flat, 1.0))
        lo = L - self.spec.tau_max - 1.0
        hi = L.copy()
        tau = self.spec.delay
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            phi = L - mid - tau(self.h_inv_log(mid))
            up = phi > 0
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
            if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(L))):
                break
        out = np.where(pos, self.h_inv_log(0.5 * (lo + hi)), 0.0).reshape(m.shape)
        return out if m.ndim else float(out)

    @cached_property
    def theta1(self) -> float:
        return float(self.theta(1.0))

    def delta(self, m):
        """Delta(m) = Theta(g^{-1}(m)); equals Theta(1) on [g(1), 1]."""
        return self.theta(self.spec.division.g_inv(m))

    def theta_inv(self, y):
        y = np.asarray(y, dtype=float)
        return self.h_inv_log(self.log_h(y) + self.spec.delay(y))

    def delta_inv(self, y):
        """Inverse of Delta on its increasing branch, defined for y in [0, Theta(1))."""
        y = np.asarray(y, dtype=float)
        if np.any(y >= self.theta1) or np.any(y < 0):
            raise DomainError(f"delta_inv defined on [0, Theta(1)={self.theta1:.12g})")
        out = self.spec.division.g(self.theta_inv(y))
        return out if y.ndim else float(out)

    # -- survival kernels ----------------------------------------------------

    def _velocity_loss(self, t, m):
        """int_0^t V'(chi(-s, m)) ds, vectorised."""
        t, m = np.broadcast_arrays(np.asarray(t, float), np.asarray(m, float))
        V = self.spec.velocity
        if self._closed:
            a, p = V.coefficient, V.exponent
            if p == 1.0:
                return a * t
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.power(m, 1.0 - p) + a * (p - 1.0) * t
                out = p * (np.log(m) - np.log(z) / (1.0 - p))
            return np.where(m > 0, out, 0.0)
        # d/ds ln V(chi(-s,m)) = -V'(chi(-s,m)), so the integral is a log ratio.
        c = self.chi(-t, m)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(V(m)) - np.log(V(c))
        out = np.where(m > 0, out, float(V.derivative(0.0)) * t)
        bad = (m > 0) & ~(V(c) > 1e-280)
        if np.any(bad):
            for idx in zip(*np.nonzero(bad)):
                out[idx] = _quad(lambda s, mm=m[idx]: V.derivative(self.chi(-s, mm)), 0.0, t[idx], self.quad_tol)
        return out

    def _rate_loss(self, rate: Profile, t, m):
        """int_0^t rate(chi(-s, m)) ds, vectorised."""
        t, m = np.broadcast_arrays(np.asarray(t, float), np.asarray(m, float))
        if rate.is_constant:
            return rate.values[0] * t
        out = np.empty(t.shape)
        for idx in np.ndindex(t.shape):
            out[idx] = _quad(lambda s, mm=m[idx]: rate(self.chi(-s, mm)), 0.0, t[idx], self.quad_tol)
        return out

    def loss_integral_quad(self, rate: Profile, t: float, m: float) -> float:
        """int_0^t [rate + V'](chi(-s, m)) ds by plain quadrature of the full integrand."""
        V = self.spec.velocity
        return _quad(lambda s: rate(self.chi(-s, m)) + V.derivative(self.chi(-s, m)), 0.0, t, self.quad_tol)

    def kernel_K(self, t, m):
        """Resting-phase survival exp(-int_0^t [delta + V'](chi(-s, m)) ds)."""
        out = np.exp(-(self._rate_loss(self.spec.delta, t, m) + self._velocity_loss(t, m)))
        return out if out.ndim else float(out)

    def kernel_H(self, t, m):
        """Proliferating-phase survival exp(-int_0^t [gamma + V'](chi(-s, m)) ds)."""
        out = np.exp(-(self._rate_loss(self.spec.gamma, t, m) + self._velocity_loss(t, m)))
        return out if out.ndim else float(out)

    def xi(self, t, m):
        """Division survival rate; zero for m > g(1)."""
        div = self.spec.division
        m = np.asarray(m, dtype=float)
        slope = div.g_inv_derivative(m)
        out = slope * self.kernel_H(t, div.g_inv(m))
        out = np.where(m > div.g1, 0.0, out)
        return out if out.ndim else float(out)

    def pi(self, t, m):
        out = self.spec.alpha_pi(m) * np.asarray(self.kernel_H(t, m))
        return out if out.ndim else float(out)

    def xi_bar(self, m):
        return self.xi(self.spec.delay(self.delta(m)), m)

    def pi_bar(self, m):
        return self.pi(self.spec.delay(self.theta(m)), m)

    # -- dependence schedule -------------------------------------------------

    @cached_property
    def delta_check(self):
        return check_delta_strict(self.spec, self)

    def schedule(self, b: float) -> PropagationSchedule:
        """Maturity transmission sequence b_0 = g(b), b_{n+1} = Delta^{-1}(b_n) and its times.

        When g(b) >= Theta(1) the sequence jumps straight to g(1) and N = 0; the
        resulting t_bar is a valid (conservative) agreement time.
        """
        if not 0 < b < 1:
            raise DomainError("b must lie in (0, 1)")
        if not self.delta_check.holds:
            raise DomainError(f"Delta(m) < m fails (witness m={self.delta_check.witness})")
        g1 = float(self.spec.division.g1)
        seq = [float(self.spec.division.g(b))]
        while seq[-1] < self.theta1:
            seq.append(float(self.delta_inv(seq[-1])))
            if len(seq) > 10_000:
                raise DomainError("maturity sequence stalls")
        if len(seq) == 1:
            N = 0
            seq.append(g1)
        else:
            N = len(seq) - 2
            seq.append(g1)
        tau_max = self.spec.tau_max
        t_bar = math.log(self.h(g1) / self.h(seq[0])) + (N + 2) * tau_max
        t_full = t_bar + tau_max - math.log(self.h(g1))
        return PropagationSchedule(tuple(seq), N, t_bar, t_full)
