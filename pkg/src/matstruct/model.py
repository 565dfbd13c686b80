"""Model functions, standing hypotheses, and validated model / initial-data containers.

Every model function is a small frozen dataclass evaluating vectorised over numpy
arrays.  :func:`build_model` assembles them into a :class:`ModelSpec`, checking each
standing hypothesis on a validation grid and raising :class:`HypothesisViolation`
with the offending condition and location.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator, RegularGridInterpolator

VALIDATION_EPS = 1e-6
VALIDATION_POINTS = 2048


class HypothesisViolation(ValueError):
    """A standing hypothesis of the model fails.

    Attributes
    ----------
    which : str
        Short name of the violated condition.
    location : float or None
        A maturity at which the violation was observed, when meaningful.
    detail : str
        Human readable explanation.
    """

    def __init__(self, which: str, location: float | None = None, detail: str = ""):
        self.which = which
        self.location = location
        self.detail = detail
        msg = f"hypothesis violated: {which}"
        if location is not None:
            msg += f" (at m={location:.9g})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


def validation_grid(eps: float = VALIDATION_EPS, n: int = VALIDATION_POINTS) -> np.ndarray:
    """Points of (eps, 1] used to check "for all m" conditions: half log-spaced, half uniform."""
    half = n // 2
    pts = np.concatenate([np.geomspace(eps, 1.0, half), np.linspace(eps, 1.0, n - half)])
    return np.unique(pts)


def _as_tuple(values) -> tuple:
    return tuple(float(v) for v in np.asarray(values, dtype=float).ravel())


def _pchip(m, v) -> PchipInterpolator:
    return PchipInterpolator(np.asarray(m, float), np.asarray(v, float), extrapolate=True)


def _check_table(name: str, m: tuple, v: tuple) -> None:
    if len(m) != len(v) or len(m) < 2:
        raise HypothesisViolation(f"{name} table", detail="need matching m/value samples (>= 2)")
    arr = np.asarray(m)
    if np.any(np.diff(arr) <= 0):
        raise HypothesisViolation(f"{name} table", detail="maturity samples must be strictly increasing")
    if arr[0] > 0.0 or arr[-1] < 1.0:
        raise HypothesisViolation(f"{name} table", detail="samples must cover [0, 1]")


# ---------------------------------------------------------------------------
# maturity profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """A continuous function of maturity: either a constant or PCHIP-interpolated samples."""

    values: tuple
    nodes: tuple | None = None
    _interp: PchipInterpolator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.nodes is not None:
            _check_table("profile", self.nodes, self.values)
            object.__setattr__(self, "_interp", _pchip(self.nodes, self.values))

    @classmethod
    def constant(cls, c: float) -> "Profile":
        return cls((float(c),))

    @classmethod
    def tabulated(cls, m, v) -> "Profile":
        return cls(_as_tuple(v), _as_tuple(m))

    @property
    def is_constant(self) -> bool:
        return self.nodes is None

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        if self.nodes is None:
            return np.full(m.shape, self.values[0]) if m.ndim else self.values[0]
        out = self._interp(np.clip(m, 0.0, 1.0))
        return out if m.ndim else float(out)

    def derivative(self, m):
        m = np.asarray(m, dtype=float)
        if self.nodes is None:
            return np.zeros(m.shape) if m.ndim else 0.0
        out = self._interp.derivative()(np.clip(m, 0.0, 1.0))
        return out if m.ndim else float(out)

    # PCHIP never overshoots its data, so extremes sit at the samples.
    def sup(self) -> float:
        return max(self.values)

    def inf(self) -> float:
        return min(self.values)

    def to_dict(self):
        if self.nodes is None:
            return self.values[0]
        return {"family": "tabulated", "m": list(self.nodes), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d) -> "Profile":
        if isinstance(d, (int, float)):
            return cls.constant(d)
        if d.get("family", "tabulated") == "constant":
            return cls.constant(d["value"])
        return cls.tabulated(d["m"], d["values"])


# ---------------------------------------------------------------------------
# maturation velocity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLawVelocity:
    """V(m) = coefficient * m**exponent on [0, 1]."""

    coefficient: float = 1.0
    exponent: float = 1.0

    family = "power_law"

    def __call__(self, m):
        return self.coefficient * np.power(m, self.exponent)

    def derivative(self, m):
        m = np.asarray(m, dtype=float)
        if self.exponent == 1.0:
            return np.full(m.shape, self.coefficient) if m.ndim else self.coefficient
        return self.coefficient * self.exponent * np.power(m, self.exponent - 1.0)

    def validate(self) -> None:
        if not self.coefficient > 0:
            raise HypothesisViolation("V: coefficient > 0", detail=f"got {self.coefficient}")
        if not self.exponent >= 1:
            raise HypothesisViolation(
                "V: 1/V not integrable at 0", detail=f"power law exponent {self.exponent} < 1"
            )

    def to_dict(self):
        return {"family": self.family, "coefficient": self.coefficient, "exponent": self.exponent}


@dataclass(frozen=True)
class TabulatedVelocity:
    """V from samples on [0, 1] with V(0) = 0, interpolated by PCHIP (C1)."""

    m: tuple
    values: tuple
    _interp: PchipInterpolator | None = field(default=None, init=False, repr=False, compare=False)

    family = "tabulated"

    def __post_init__(self):
        object.__setattr__(self, "m", _as_tuple(self.m))
        object.__setattr__(self, "values", _as_tuple(self.values))
        _check_table("V", self.m, self.values)
        object.__setattr__(self, "_interp", _pchip(self.m, self.values))

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        out = self._interp(np.clip(m, 0.0, 1.0))
        return out if m.ndim else float(out)

    def derivative(self, m):
        m = np.asarray(m, dtype=float)
        out = self._interp.derivative()(np.clip(m, 0.0, 1.0))
        return out if m.ndim else float(out)

    def validate(self) -> None:
        if self.values[0] != 0.0:
            raise HypothesisViolation("V(0) = 0", location=0.0, detail=f"V(0)={self.values[0]}")
        v = np.asarray(self.values[1:])
        if np.any(v <= 0):
            k = int(np.argmax(v <= 0)) + 1
            raise HypothesisViolation("V > 0 on (0,1]", location=self.m[k])
        # The samples must decay at least linearly: V(m)/m may not grow towards 0.
        q = v[:2] / np.asarray(self.m[1:3])
        if len(q) == 2 and q[0] > q[1] * (1.0 + 1e-9):
            raise HypothesisViolation("int_0^m ds/V(s) = infinity", location=self.m[1],
                                      detail="V(m)/m increases towards 0: samples decay slower than linearly")
        # A C1 interpolant with V(0)=0 has V(m) = O(m): 1/V is then non-integrable at 0.
        slope0 = self.derivative(0.0)
        if not np.isfinite(slope0):
            raise HypothesisViolation("V continuously differentiable", location=0.0)

    def to_dict(self):
        return {"family": self.family, "m": list(self.m), "values": list(self.values)}


# ---------------------------------------------------------------------------
# division delay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogAffineDelay:
    """tau(m) = ln(m + alpha)."""

    alpha: float

    family = "log_affine"

    def __call__(self, m):
        return np.log(np.asarray(m, dtype=float) + self.alpha)

    def derivative(self, m):
        return 1.0 / (np.asarray(m, dtype=float) + self.alpha)

    def validate(self) -> None:
        if not self.alpha > 1:
            raise HypothesisViolation("tau > 0", location=0.0, detail=f"log_affine needs alpha > 1, got {self.alpha}")

    def extremes(self) -> tuple[float, float]:
        return math.log(self.alpha), math.log(1.0 + self.alpha)

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha}


@dataclass(frozen=True)
class ConstantDelay:
    r: float

    family = "constant"

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        return np.full(m.shape, self.r) if m.ndim else self.r

    def derivative(self, m):
        m = np.asarray(m, dtype=float)
        return np.zeros(m.shape) if m.ndim else 0.0

    def validate(self) -> None:
        if not self.r > 0:
            raise HypothesisViolation("tau > 0", location=0.0, detail=f"constant delay {self.r}")

    def extremes(self) -> tuple[float, float]:
        return self.r, self.r

    def to_dict(self):
        return {"family": self.family, "r": self.r}


@dataclass(frozen=True)
class TabulatedDelay:
    m: tuple
    values: tuple
    _interp: PchipInterpolator | None = field(default=None, init=False, repr=False, compare=False)

    family = "tabulated"

    def __post_init__(self):
        object.__setattr__(self, "m", _as_tuple(self.m))
        object.__setattr__(self, "values", _as_tuple(self.values))
        _check_table("tau", self.m, self.values)
        object.__setattr__(self, "_interp", _pchip(self.m, self.values))

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        out = self._interp(np.clip(m, 0.0, 1.0))
        return out if m.ndim else float(out)

    def derivative(self, m):
        m = np.asarray(m, dtype=float)
        out = self._interp.derivative()(np.clip(m, 0.0, 1.0))
        return out if m.ndim else float(out)

    def validate(self) -> None:
        v = np.asarray(self.values)
        if np.any(v <= 0):
            k = int(np.argmax(v <= 0))
            raise HypothesisViolation("tau > 0", location=self.m[k], detail=f"tau={v[k]}")

    def extremes(self) -> tuple[float, float]:
        return min(self.values), max(self.values)

    def to_dict(self):
        return {"family": self.family, "m": list(self.m), "values": list(self.values)}


# ---------------------------------------------------------------------------
# division map g
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearDivision:
    """g(m) = m / kappa; the inverse is extended by 1 above g(1)."""

    kappa: float

    family = "linear"

    @property
    def g1(self) -> float:
        return 1.0 / self.kappa

    def g(self, m):
        return np.asarray(m, dtype=float) / self.kappa

    def g_inv(self, m):
        return np.minimum(self.kappa * np.asarray(m, dtype=float), 1.0)

    def g_inv_derivative(self, m):
        m = np.asarray(m, dtype=float)
        return np.where(m <= self.g1, self.kappa, 0.0)

    def validate(self) -> None:
        if not self.kappa > 1:
            raise HypothesisViolation(
                "g(m) <= m", location=1.0, detail=f"linear division needs kappa > 1, got kappa={self.kappa}"
            )

    def to_dict(self):
        return {"family": self.family, "kappa": self.kappa}


@dataclass(frozen=True)
class TabulatedDivision:
    """Strictly increasing g from samples (PCHIP); g^{-1} by bracketed inversion."""

    m: tuple
    values: tuple
    _interp: PchipInterpolator | None = field(default=None, init=False, repr=False, compare=False)
    _inverse: PchipInterpolator | None = field(default=None, init=False, repr=False, compare=False)

    family = "tabulated"

    def __post_init__(self):
        object.__setattr__(self, "m", _as_tuple(self.m))
        object.__setattr__(self, "values", _as_tuple(self.values))
        _check_table("g", self.m, self.values)
        object.__setattr__(self, "_interp", _pchip(self.m, self.values))

    @property
    def g1(self) -> float:
        return float(self._interp(1.0))

    def g(self, m):
        m = np.asarray(m, dtype=float)
        out = self._interp(np.clip(m, 0.0, 1.0))
        return out if m.ndim else float(out)

    def g_inv(self, y):
        y = np.asarray(y, dtype=float)
        flat = np.atleast_1d(y).ravel()
        lo = np.zeros_like(flat)
        hi = np.ones_like(flat)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self._interp(mid) < flat
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = np.where(flat >= self.g1, 1.0, 0.5 * (lo + hi)).reshape(np.shape(y))
        return out if y.ndim else float(out)

    def g_inv_derivative(self, y):
        y = np.asarray(y, dtype=float)
        d = self._interp.derivative()(self.g_inv(y))
        out = np.where(y <= self.g1, 1.0 / d, 0.0)
        return out if y.ndim else float(out)

    def validate(self) -> None:
        v = np.asarray(self.values)
        if np.any(np.diff(v) <= 0):
            raise HypothesisViolation("g strictly increasing")
        grid = np.concatenate([[0.0], validation_grid()])
        gv = self.g(grid)
        bad = gv > grid + 1e-15
        if np.any(bad):
            raise HypothesisViolation("g(m) <= m", location=float(grid[np.argmax(bad)]))
        if gv[0] < 0 or self.g1 > 1:
            raise HypothesisViolation("g maps [0,1] into [0,1]")

    def to_dict(self):
        return {"family": self.family, "m": list(self.m), "values": list(self.values)}


# ---------------------------------------------------------------------------
# re-entry rate
# ---------------------------------------------------------------------------


def hill(beta0, theta, n, x):
    """beta0 * theta**n / (theta**n + x**n), written to stay finite for large x."""
    with np.errstate(over="ignore"):  # x**n -> inf gives beta = 0, the correct limit
        return beta0 / (1.0 + np.power(np.abs(x) / theta, n))


@dataclass(frozen=True)
class HillReentry:
    """beta(m, x) = beta0(m) theta(m)^n / (theta(m)^n + x^n)."""

    beta0: Profile
    theta: Profile
    n: float = 2.0

    def __call__(self, m, x):
        return hill(self.beta0(m), self.theta(m), self.n, x)

    def flux(self, m, x):
        """x * beta(m, x)."""
        return x * self(m, x)

    def validate(self) -> None:
        if self.beta0.inf() <= 0:
            raise HypothesisViolation("beta > 0", detail="beta0 profile must be positive")
        if self.theta.inf() <= 0:
            raise HypothesisViolation("beta: theta > 0", detail="theta profile must be positive")
        if not self.n >= 1:
            raise HypothesisViolation("beta: Hill exponent n >= 1", detail=f"got n={self.n}")

    def to_dict(self):
        return {"beta0": self.beta0.to_dict(), "theta": self.theta.to_dict(), "n": self.n}

    @classmethod
    def from_dict(cls, d) -> "HillReentry":
        return cls(Profile.from_dict(d["beta0"]), Profile.from_dict(d["theta"]), float(d.get("n", 2.0)))


# ---------------------------------------------------------------------------
# the model
# ---------------------------------------------------------------------------


_VELOCITY = {"power_law": PowerLawVelocity, "tabulated": TabulatedVelocity}
_DELAY = {"log_affine": LogAffineDelay, "constant": ConstantDelay, "tabulated": TabulatedDelay}
_DIVISION = {"linear": LinearDivision, "tabulated": TabulatedDivision}


def _family_from_dict(table: dict, d: dict, what: str):
    d = dict(d)
    fam = d.pop("family", None)
    if fam not in table:
        raise HypothesisViolation(f"{what} family", detail=f"unknown family {fam!r}; choose from {sorted(table)}")
    try:
        return table[fam](**d)
    except TypeError as exc:
        raise HypothesisViolation(f"{what} family", detail=str(exc)) from None


@dataclass(frozen=True)
class ModelSpec:
    """A validated model instance.  Build with :func:`build_model`."""

    velocity: PowerLawVelocity | TabulatedVelocity
    delay: LogAffineDelay | ConstantDelay | TabulatedDelay
    division: LinearDivision | TabulatedDivision
    reentry: HillReentry
    delta: Profile
    gamma: Profile
    alpha_pi: Profile = Profile.constant(1.0)

    @property
    def tau_max(self) -> float:
        return self.delay.extremes()[1]

    @property
    def tau_min(self) -> float:
        return self.delay.extremes()[0]

    @property
    def r(self) -> float:
        """Division delay of the immature cells, tau(0)."""
        return float(self.delay(0.0))

    @property
    def rho(self) -> float:
        """Resting loss rate at m=0: delta(0) + V'(0)."""
        return float(self.delta(0.0)) + float(self.velocity.derivative(0.0))

    @property
    def eta(self) -> float:
        """Proliferating loss rate at m=0: gamma(0) + V'(0)."""
        return float(self.gamma(0.0)) + float(self.velocity.derivative(0.0))

    def derived(self) -> dict:
        return {"tau_max": self.tau_max, "tau_min": self.tau_min, "rho": self.rho, "eta": self.eta, "r": self.r}

    def to_dict(self) -> dict:
        return {
            "velocity": self.velocity.to_dict(),
            "delay": self.delay.to_dict(),
            "division": self.division.to_dict(),
            "reentry": self.reentry.to_dict(),
            "delta": self.delta.to_dict(),
            "gamma": self.gamma.to_dict(),
            "alpha_pi": self.alpha_pi.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return build_model(
            velocity=_family_from_dict(_VELOCITY, d["velocity"], "velocity"),
            delay=_family_from_dict(_DELAY, d["delay"], "delay"),
            division=_family_from_dict(_DIVISION, d["division"], "division"),
            reentry=HillReentry.from_dict(d["reentry"]),
            delta=Profile.from_dict(d.get("delta", 0.0)),
            gamma=Profile.from_dict(d.get("gamma", 0.0)),
            alpha_pi=Profile.from_dict(d.get("alpha_pi", 1.0)),
        )


def build_model(velocity, delay, division, reentry, delta=0.0, gamma=0.0, alpha_pi=1.0) -> ModelSpec:
    """Validate the model functions and return a :class:`ModelSpec`.

    Scalars are accepted for ``delta``, ``gamma`` and ``alpha_pi`` and turned into
    constant profiles.

    Raises
    ------
    HypothesisViolation
        naming the first failed standing hypothesis.
    """
    delta, gamma, alpha_pi = (p if isinstance(p, Profile) else Profile.constant(p) for p in (delta, gamma, alpha_pi))
    for part in (velocity, delay, division, reentry):
        part.validate()

    grid = validation_grid()
    full = np.concatenate([[0.0], grid])

    tau = np.asarray(delay(full))
    if np.any(tau <= 0):
        k = int(np.argmax(tau <= 0))
        raise HypothesisViolation("tau > 0", location=float(full[k]), detail=f"tau={tau[k]}")
    cond = np.asarray(delay.derivative(grid)) + 1.0 / np.asarray(velocity(grid))
    if np.any(~(cond > 0)):
        k = int(np.argmax(~(cond > 0)))
        raise HypothesisViolation("tau'(m) + 1/V(m) > 0", location=float(grid[k]))

    v = np.asarray(velocity(grid))
    if np.any(v <= 0):
        raise HypothesisViolation("V > 0 on (0,1]", location=float(grid[int(np.argmax(v <= 0))]))
    if not np.isfinite(velocity.derivative(0.0)):
        raise HypothesisViolation("V'(0) finite", location=0.0)

    for name, prof in (("delta >= 0", delta), ("gamma >= 0", gamma)):
        vals = np.asarray(prof(full))
        if np.any(vals < 0):
            raise HypothesisViolation(name, location=float(full[int(np.argmax(vals < 0))]))
    if alpha_pi.inf() <= 0:
        raise HypothesisViolation("alpha_pi > 0")
    if abs(float(alpha_pi(0.0)) - 1.0) > 1e-12:
        raise HypothesisViolation("alpha_pi(0) = 1", location=0.0, detail=f"got {float(alpha_pi(0.0))}")

    return ModelSpec(velocity, delay, division, reentry, delta, gamma, alpha_pi)


def example_family(kappa=2.0, alpha=4.0, delta=0.1, gamma=0.2, beta0=1.0, theta=1.0, n=2.0) -> ModelSpec:
    """The worked family V(m)=m, g(m)=m/kappa, tau(m)=ln(m+alpha), Hill re-entry, constant mortality."""
    return build_model(
        PowerLawVelocity(1.0, 1.0),
        LogAffineDelay(alpha),
        LinearDivision(kappa),
        HillReentry(Profile.constant(beta0), Profile.constant(theta), n),
        delta=delta,
        gamma=gamma,
    )


# ---------------------------------------------------------------------------
# hypothesis checks that need the characteristic machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaCheck:
    holds: bool
    witness: float | None
    origin_slope: float


def check_delta_strict(spec: ModelSpec, tables=None) -> DeltaCheck:
    """Whether Delta(m) < m on (0, 1].

    The strict inequality is required uniformly: besides the grid test, the slope
    Delta'(0) = exp(-V'(0) tau(0)) (g^{-1})'(0) must be < 1, otherwise Delta(m)/m -> 1
    at the origin.  ``witness`` is a violating maturity (0.0 for a violation in the
    limit sense only).
    """
    from .characteristics import CharTables

    tables = tables if tables is not None else CharTables(spec)
    grid = validation_grid()
    d = tables.delta(grid)
    bad = ~(d < grid)
    slope = math.exp(-float(spec.velocity.derivative(0.0)) * spec.r) * float(spec.division.g_inv_derivative(0.0))
    if np.any(bad):
        return DeltaCheck(False, float(grid[int(np.argmax(bad))]), slope)
    if not slope < 1.0:
        return DeltaCheck(False, 0.0, slope)
    return DeltaCheck(True, None, slope)


@dataclass(frozen=True)
class Compatibility:
    compatible: bool
    lhs: float
    rhs: float


def check_compatibility(spec: ModelSpec, data: "InitialData", abs_tol: float = 1e-9) -> Compatibility:
    """Gamma(0,0) against beta(0, mu(0)) mu(0); advisory only."""
    lhs = float(data.gamma(0.0, 0.0))
    mu0 = float(data.mu(0.0))
    rhs = float(spec.reentry.flux(0.0, mu0))
    return Compatibility(abs(lhs - rhs) <= abs_tol, lhs, rhs)


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def _smooth_ramp(z):
    """C1 ramp: 0 for z <= 0, 1 for z >= 1, 3z^2 - 2z^3 between."""
    z = np.clip(z, 0.0, 1.0)
    return z * z * (3.0 - 2.0 * z)


@dataclass(frozen=True)
class InitialData:
    """Resting density mu(m) and proliferating age density Gamma(m, a) at t = 0.

    ``mu`` and ``gamma`` must be vectorised callables.  ``source`` records how the data
    were produced so that a run can be reproduced from its metadata.
    """

    mu: Callable
    gamma: Callable
    source: dict = field(default_factory=dict)
    biological: bool = True

    def validate(self, tau_max: float) -> "InitialData":
        if not self.biological:
            return self
        m = np.concatenate([[0.0], validation_grid(n=512)])
        if np.any(np.asarray(self.mu(m)) < 0):
            raise HypothesisViolation("mu >= 0", location=float(m[int(np.argmax(np.asarray(self.mu(m)) < 0))]))
        mm, aa = np.meshgrid(m[::8], np.linspace(0.0, tau_max, 33), indexing="ij")
        if np.any(np.asarray(self.gamma(mm, aa)) < 0):
            raise HypothesisViolation("Gamma >= 0")
        return self

    def gamma_bar(self, m, upper, n: int = 48):
        """int_0^upper Gamma(m, a) da by Gauss-Legendre on each point (vectorised)."""
        m = np.atleast_1d(np.asarray(m, dtype=float))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), m.shape)
        x, w = np.polynomial.legendre.leggauss(n)
        a = 0.5 * upper[:, None] * (x[None, :] + 1.0)
        vals = np.asarray(self.gamma(np.broadcast_to(m[:, None], a.shape), a))
        return 0.5 * upper * (vals @ w)

    def __add__(self, other: "InitialData") -> "InitialData":
        return InitialData(
            lambda m: self.mu(m) + other.mu(m),
            lambda m, a: self.gamma(m, a) + other.gamma(m, a),
            {"preset": "sum", "terms": [self.source, other.source]},
            self.biological and other.biological,
        )


def constant_data(level: float = 1.0, gamma_level: float = 0.5) -> InitialData:
    return InitialData(
        lambda m: np.full(np.shape(m), float(level)) if np.ndim(m) else float(level),
        lambda m, a: np.full(np.broadcast(m, a).shape, float(gamma_level)) if np.ndim(m) or np.ndim(a) else float(gamma_level),
        {"preset": "constant", "level": level, "gamma_level": gamma_level},
    )


def bump_data(b: float, height: float = 1.0, width: float = 0.15, gamma_ratio: float = 0.5) -> InitialData:
    """A C2 bump of the given height centred at maturity ``b``; Gamma = gamma_ratio * mu."""

    def mu(m):
        z = (np.asarray(m, dtype=float) - b) / width
        return height * np.where(np.abs(z) < 1.0, (1.0 - z * z) ** 3, 0.0)

    return InitialData(
        mu,
        lambda m, a: gamma_ratio * mu(m) * np.ones_like(np.asarray(a, dtype=float)),
        {"preset": "bump", "b": b, "height": height, "width": width, "gamma_ratio": gamma_ratio},
    )


def zero_below_data(b: float, level: float = 1.0, ramp: float = 0.1, gamma_ratio: float = 0.5) -> InitialData:
    """Data vanishing exactly on [0, b], rising smoothly to a mildly varying profile above."""

    def mu(m):
        m = np.asarray(m, dtype=float)
        return level * _smooth_ramp((m - b) / ramp) * (1.0 + 0.5 * np.sin(3.0 * m))

    def gamma(m, a):
        a = np.asarray(a, dtype=float)
        return gamma_ratio * mu(m) * (1.0 + 0.25 * np.cos(a))

    return InitialData(mu, gamma, {"preset": "zero-below", "b": b, "level": level, "ramp": ramp, "gamma_ratio": gamma_ratio})


def tabulated_data(m, mu_values, gm, ga, gamma_values, source: dict | None = None) -> InitialData:
    """Data from tables: (m, mu) linearly interpolated and Gamma on a rectangular (m, a) grid."""
    m = np.asarray(m, float)
    mu_values = np.asarray(mu_values, float)
    rgi = RegularGridInterpolator(
        (np.asarray(gm, float), np.asarray(ga, float)), np.asarray(gamma_values, float), bounds_error=False, fill_value=None
    )

    def mu(x):
        return np.interp(x, m, mu_values)

    def gamma(x, a):
        x, a = np.broadcast_arrays(np.asarray(x, float), np.asarray(a, float))
        pts = np.stack([np.clip(x, gm[0], gm[-1]), np.clip(a, ga[0], ga[-1])], axis=-1)
        return rgi(pts)

    return InitialData(mu, gamma, source or {"preset": "tabulated"})


def data_from_dict(d: dict) -> InitialData:
    """Build initial data from a preset description (as found in a run config)."""
    d = dict(d)
    preset = d.pop("preset", "constant")
    if preset == "constant":
        return constant_data(**d)
    if preset == "bump":
        return bump_data(**d)
    if preset == "zero-below":
        return zero_below_data(**d)
    if preset == "sum":
        terms = [data_from_dict(t) for t in d["terms"]]
        out = terms[0]
        for t in terms[1:]:
            out = out + t
        return out
    if preset == "csv":
        from .io import read_initial_csv

        return read_initial_csv(d["mu_csv"], d["gamma_csv"])
    raise HypothesisViolation("initial data preset", detail=f"unknown preset {preset!r}")
