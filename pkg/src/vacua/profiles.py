"""Analytic frequency profiles omega(t) and scale factors a(t).

Every profile carries hand-coded closed-form derivatives.  Finite differences
appear only in :func:`validate_derivatives`, which is a diagnostic.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import expit

from .errors import ConfigError, DomainError, ParameterError

PROFILE_KINDS = (
    "Tanh1",
    "Tanh2",
    "SqrtLinear",
    "InverseLinear",
    "Lorentzian",
    "Constant",
    "ScalarFRW",
    "Custom",
)
SCALE_FACTOR_KINDS = ("SinhGamma", "StepRamp36", "Custom")


def _check_domain(t, domain, what):
    lo, hi = domain
    arr = np.asarray(t, dtype=float)
    bad = ~((arr > lo) & (arr < hi))
    if np.any(bad):
        first = float(arr[bad].flat[0])
        raise DomainError(f"{what}: t={first!r} outside domain ({lo}, {hi})", t=first)
    return arr


# --------------------------------------------------------------------------
# scale factors


@dataclass(frozen=True)
class ScaleFactor:
    """Prescribed scale factor with derivatives up to fourth order.

    ``derivs(t)`` returns ``(a, a', a'', a''', a'''')``.  The fourth
    derivative is only needed by the scalar FRW frequency's second
    derivative (sigma-equation path).
    """

    kind: str
    params: Mapping[str, float]
    domain: tuple[float, float]
    _derivs: Callable = field(repr=False, compare=False)

    def derivs(self, t):
        arr = _check_domain(t, self.domain, f"scale factor {self.kind}")
        out = self._derivs(arr)
        a = np.asarray(out[0])
        if np.any(a <= 0):
            bad = float(np.asarray(arr)[a <= 0].flat[0]) if np.ndim(arr) else float(arr)
            raise DomainError(f"scale factor {self.kind} non-positive at t={bad}", t=bad)
        return out

    def __call__(self, t):
        return eval_scale_factor(self, t)

    @classmethod
    def sinh_gamma(cls, gamma: float) -> "ScaleFactor":
        if gamma <= 0:
            raise ParameterError("gamma must be positive")

        def f(t):
            s = np.sinh(gamma * t)
            c = np.cosh(gamma * t)
            return (s, gamma * c, gamma**2 * s, gamma**3 * c, gamma**4 * s)

        return cls("SinhGamma", {"gamma": gamma}, (0.0, math.inf), f)

    @classmethod
    def step_ramp36(cls) -> "ScaleFactor":
        """tau/(1+exp(3-tau)) + 4/(1 - (tau+15)/(1+exp(tau+25)))."""
        return cls("StepRamp36", {}, (-math.inf, math.inf), _step_ramp_derivs)

    @classmethod
    def custom(cls, derivs: Callable, domain=(-math.inf, math.inf), name="Custom") -> "ScaleFactor":
        """Wrap a user callable returning ``(a, a', a'', a''', a'''')``."""
        return cls("Custom", {"name": name}, tuple(domain), derivs)


def _logistic_derivs(x):
    # derivatives of S(x) = 1/(1+exp(-x)) up to fourth order
    s = expit(x)
    q = s * (1.0 - s)
    return (
        s,
        q,
        q * (1.0 - 2.0 * s),
        q * (1.0 - 6.0 * s + 6.0 * s * s),
        q * (1.0 - 2.0 * s) * (1.0 - 12.0 * s + 12.0 * s * s),
    )


def _step_ramp_derivs(t):
    t = np.asarray(t, dtype=float)
    # first term: t * S(t - 3); Leibniz with a linear factor
    S = _logistic_derivs(t - 3.0)
    ramp = [t * S[0]] + [t * S[n] + n * S[n - 1] for n in range(1, 5)]

    # second term: 4 / D with D = 1 - (t + 15) L(t + 25), L(y) = 1/(1+e^y) = 1 - S(y)
    Sy = _logistic_derivs(t + 25.0)
    L = [1.0 - Sy[0]] + [-Sy[n] for n in range(1, 5)]
    g = [(t + 15.0) * L[0]] + [(t + 15.0) * L[n] + n * L[n - 1] for n in range(1, 5)]
    d0, d1, d2, d3, d4 = 1.0 - g[0], -g[1], -g[2], -g[3], -g[4]
    inv = (
        1.0 / d0,
        -d1 / d0**2,
        -d2 / d0**2 + 2.0 * d1**2 / d0**3,
        -d3 / d0**2 + 6.0 * d1 * d2 / d0**3 - 6.0 * d1**3 / d0**4,
        -d4 / d0**2
        + (8.0 * d1 * d3 + 6.0 * d2**2) / d0**3
        - 36.0 * d1**2 * d2 / d0**4
        + 24.0 * d1**4 / d0**5,
    )
    return tuple(ramp[n] + 4.0 * inv[n] for n in range(5))


def eval_scale_factor(sf: ScaleFactor, t):
    """Return ``(a, a', a'', a''')`` at ``t``."""
    a, a1, a2, a3, _ = sf.derivs(t)
    return a, a1, a2, a3


# --------------------------------------------------------------------------
# frequency profiles


@dataclass(frozen=True)
class FrequencyProfile:
    """omega(t) together with its first and second derivatives.

    ``omega2`` is kept separate from ``omega`` because the scalar FRW
    oscillator with the ``minus`` sign may have omega^2 < 0 somewhere;
    mode integration only needs omega^2, while the sigma equation needs
    omega itself.
    """

    kind: str
    params: Mapping[str, float]
    domain: tuple[float, float]
    _derivs: Callable = field(repr=False, compare=False)
    _omega2: Callable | None = field(default=None, repr=False, compare=False)

    def __call__(self, t):
        return eval_profile(self, t)

    def omega2(self, t):
        arr = _check_domain(t, self.domain, f"profile {self.kind}")
        if self._omega2 is not None:
            return self._omega2(arr)
        w = self._derivs(arr)[0]
        return w * w

    def contains(self, t) -> bool:
        lo, hi = self.domain
        arr = np.asarray(t, dtype=float)
        return bool(np.all((arr > lo) & (arr < hi)))

    # -- constructors -----------------------------------------------------

    @classmethod
    def tanh1(cls, k=1.0, H=1.0):
        """k sqrt(1 + tanh(H t)); omega -> 0 in the past, k sqrt(2) in the future."""
        return cls._tanh("Tanh1", 1.0, k, H)

    @classmethod
    def tanh2(cls, k=1.0, H=1.0):
        """k sqrt(2 + tanh(H t)); limits k and k sqrt(3)."""
        return cls._tanh("Tanh2", 2.0, k, H)

    @classmethod
    def _tanh(cls, kind, c, k, H):
        _positive(k=k, H=H)

        def f(t):
            # 1 +- tanh written through the logistic function keeps precision
            # when tanh -> -1 (omega -> 0 for Tanh1)
            one_plus = 2.0 * expit(2.0 * H * t)
            one_minus = 2.0 * expit(-2.0 * H * t)
            T = np.tanh(H * t)
            base = one_plus if c == 1.0 else c + T
            sech2 = one_plus * one_minus
            root = np.sqrt(base)
            w = k * root
            wd = k * H * sech2 / (2.0 * root)
            wdd = -k * H * H * sech2 * (T / root + sech2 / (4.0 * base * root))
            return w, wd, wdd

        return cls(kind, {"k": k, "H": H}, (-math.inf, math.inf), f)

    @classmethod
    def sqrt_linear(cls, k=1.0, H=1.0):
        """k sqrt(1 + H t), defined for t > -1/H."""
        _positive(k=k, H=H)

        def f(t):
            s = 1.0 + H * t
            r = np.sqrt(s)
            return k * r, k * H / (2.0 * r), -k * H * H / (4.0 * s * r)

        return cls("SqrtLinear", {"k": k, "H": H}, (-1.0 / H, math.inf), f)

    @classmethod
    def inverse_linear(cls, k=1.0, H=0.1):
        """k / (1 + 2 H t) on the branch of the real line containing t = 0."""
        if k <= 0 or H == 0:
            raise ParameterError("need k > 0 and H != 0")
        pole = -1.0 / (2.0 * H)
        domain = (pole, math.inf) if H > 0 else (-math.inf, pole)

        def f(t):
            s = 1.0 + 2.0 * H * t
            return k / s, -2.0 * k * H / s**2, 8.0 * k * H * H / s**3

        return cls("InverseLinear", {"k": k, "H": H}, domain, f)

    @classmethod
    def lorentzian(cls, k=1.0, H=1.0):
        """k / (1 + H^2 t^2); the adiabatic parameter grows without bound."""
        _positive(k=k, H=H)

        def f(t):
            s = 1.0 + H * H * t * t
            w = k / s
            wd = -2.0 * k * H * H * t / s**2
            wdd = 2.0 * k * H * H * (3.0 * H * H * t * t - 1.0) / s**3
            return w, wd, wdd

        return cls("Lorentzian", {"k": k, "H": H}, (-math.inf, math.inf), f)

    @classmethod
    def constant(cls, k=1.0):
        _positive(k=k)

        def f(t):
            z = np.zeros_like(np.asarray(t, dtype=float))
            return k + z, z, z.copy()

        return cls("Constant", {"k": k}, (-math.inf, math.inf), f)

    @classmethod
    def scalar_frw(cls, sf: ScaleFactor, k=1.0, m=1.0 / 16.0, sign="plus"):
        """Conformal-time scalar mode: omega^2 = k^2 + m^2 a^2 +- a''/a.

        ``sign="plus"`` uses ``+a''/a``; ``sign="minus"`` uses ``-a''/a``.
        """
        if sign not in ("plus", "minus"):
            raise ConfigError(f"frw_sign must be 'plus' or 'minus', got {sign!r}")
        s = 1.0 if sign == "plus" else -1.0

        def w2_derivs(t):
            a, a1, a2, a3, a4 = sf.derivs(t)
            w2 = k * k + m * m * a * a + s * a2 / a
            w2d = 2.0 * m * m * a * a1 + s * (a3 / a - a2 * a1 / a**2)
            w2dd = 2.0 * m * m * (a1 * a1 + a * a2) + s * (
                a4 / a - 2.0 * a3 * a1 / a**2 - a2 * a2 / a**2 + 2.0 * a2 * a1 * a1 / a**3
            )
            return w2, w2d, w2dd

        def f(t):
            w2, w2d, w2dd = w2_derivs(t)
            if np.any(np.asarray(w2) <= 0):
                raise DomainError("scalar FRW omega^2 <= 0; omega undefined (use the mode path)")
            w = np.sqrt(w2)
            wd = w2d / (2.0 * w)
            wdd = (w2dd - 2.0 * wd * wd) / (2.0 * w)
            return w, wd, wdd

        params = {"k": k, "m": m, "sign": sign, "scale_factor": sf.kind, **sf.params}
        return cls("ScalarFRW", params, sf.domain, f, lambda t: w2_derivs(t)[0])

    @classmethod
    def tabulated(cls, t, omega):
        """Custom profile from samples, monotone-cubic (PCHIP) interpolated.

        Second derivatives of a PCHIP interpolant are discontinuous at the
        knots, so such profiles should be integrated with the mode equation
        rather than the sigma equation.
        """
        t = np.asarray(t, dtype=float)
        omega = np.asarray(omega, dtype=float)
        if t.ndim != 1 or t.shape != omega.shape or t.size < 2:
            raise ConfigError("tabulated profile needs matching 1-d t and omega arrays")
        if np.any(np.diff(t) <= 0):
            raise ConfigError("tabulated t must be strictly increasing")
        if np.any(omega <= 0):
            raise ConfigError("tabulated omega must be positive")
        p0 = PchipInterpolator(t, omega, extrapolate=False)
        p1, p2 = p0.derivative(1), p0.derivative(2)
        # closed interval: widen the open-domain check by one ulp
        domain = (np.nextafter(t[0], -np.inf), np.nextafter(t[-1], np.inf))
        return cls("Custom", {"n_knots": int(t.size)}, domain, lambda s: (p0(s), p1(s), p2(s)))

    @classmethod
    def from_csv(cls, path):
        """Read a two-column ``t,omega`` CSV (header required)."""
        with Path(path).open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["t", "omega"]:
            raise ConfigError(f"{path}: expected header 't,omega'")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        return cls.tabulated(data[:, 0], data[:, 1])


def _positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise ParameterError(f"{name} must be positive, got {v}")


def eval_profile(profile: FrequencyProfile, t):
    """Return ``(omega, omega_dot, omega_ddot)`` at ``t`` (scalar or array)."""
    arr = _check_domain(t, profile.domain, f"profile {profile.kind}")
    w, wd, wdd = profile._derivs(arr)
    if np.ndim(t) == 0:
        return float(w), float(wd), float(wdd)
    return np.asarray(w), np.asarray(wd), np.asarray(wdd)


def adiabatic_parameter(profile: FrequencyProfile, t):
    """|omega_dot| / omega^2."""
    w, wd, _ = eval_profile(profile, t)
    return np.abs(wd) / w**2


def _fd4(f, t, h):
    return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12.0 * h)


def validate_derivatives(obj, t_grid, h: float) -> float:
    """Worst relative error of the analytic derivatives on ``t_grid``.

    Each analytic derivative of order n is compared with a fourth-order
    central difference of the analytic derivative of order n-1.  Errors are
    normalised by the largest magnitude of that derivative on the grid, so
    sign changes of a derivative do not inflate the figure.
    """
    t = np.asarray(t_grid, dtype=float)
    if isinstance(obj, FrequencyProfile):
        def series(s):
            return np.array(eval_profile(obj, s))
    elif isinstance(obj, ScaleFactor):
        def series(s):
            return np.array(obj.derivs(s))
    else:
        raise TypeError(f"cannot validate {type(obj).__name__}")

    exact = series(t)
    worst = 0.0
    for n in range(1, exact.shape[0]):
        fd = _fd4(lambda s: series(s)[n - 1], t, h)
        err = np.max(np.abs(fd - exact[n]))
        scale = np.max(np.abs(exact[n]))
        if err == 0.0:
            continue
        worst = max(worst, err / scale if scale > 0 else math.inf)
    return float(worst)
