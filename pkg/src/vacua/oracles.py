"""Closed-form reference solutions used to check the numerical engines.

All sigma formulas describe the squeezed family
``u = cosh r u0 + sinh r e^{i delta} u0*`` built on the closed-form vacuum u0.
"""
from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .errors import ParameterError, RegimeError
from .mode import SqueezeParams


class OracleId(str, Enum):
    CONST_OMEGA = "ConstOmega"
    TANH1_ASYM = "Tanh1Asym"
    SQRT_LINEAR_ASYM = "SqrtLinearAsym"
    INVERSE_LINEAR_EXACT = "InverseLinearExact"
    INVERSE_LINEAR_ASYM = "InverseLinearAsym"
    LORENTZIAN_EXACT = "LorentzianExact"
    LORENTZIAN_SIGMA = "LorentzianSigma"


def _kH(params):
    return float(params.get("k", 1.0)), float(params.get("H", 1.0))


def _nu(k, H):
    if not k > H:
        raise RegimeError(f"oscillating regime needs k > H (k={k}, H={H}); sigma does not oscillate otherwise")
    return math.sqrt(k * k - H * H)


def sigma_asymptote(oid, sp: SqueezeParams, params, t):
    """Large-t sigma of the squeezed family for the given profile.

    ``InverseLinearAsym`` is in fact exact for all t > -1/(2H); it is kept
    under its asymptotic name because that is how it is used.
    """
    oid = OracleId(oid)
    r, d = sp.r, sp.delta
    t = np.asarray(t, dtype=float)
    k, H = _kH(params)
    if oid is OracleId.CONST_OMEGA:
        w = float(params.get("omega", k))
        return -0.5 * np.sin(2.0 * w * t + d) * math.sinh(2 * r)
    if oid is OracleId.TANH1_ASYM:
        return -0.5 * np.sin(2.0 * math.sqrt(2.0) * k * t + d) * math.sinh(2 * r)
    if oid is OracleId.SQRT_LINEAR_ASYM:
        ph = 4.0 * k * (H * t + 1.0) ** 1.5 / (3.0 * H) + d
        return -0.25 * (np.cos(ph) + math.sqrt(3.0) * np.sin(ph)) * math.sinh(2 * r)
    if oid in (OracleId.INVERSE_LINEAR_ASYM, OracleId.INVERSE_LINEAR_EXACT):
        nu = _nu(k, H)
        ph = d + nu * np.log(2.0 * H * t + 1.0) / H
        return (
            H * math.cosh(r) ** 2
            + H * math.sinh(r) ** 2
            - nu * np.sin(ph) * math.sinh(2 * r)
            + H * np.cos(ph) * math.sinh(2 * r)
        ) / (2.0 * nu)
    if oid in (OracleId.LORENTZIAN_SIGMA, OracleId.LORENTZIAN_EXACT):
        return sigma_exact_lorentzian(sp, k, H, t)
    raise ParameterError(f"no sigma formula for {oid.value}")


def sigma_exact_lorentzian(sp: SqueezeParams, k, H, t):
    """Exact sigma for w = k/(1 + H^2 t^2), valid for all t."""
    t = np.asarray(t, dtype=float)
    root = math.sqrt(H * H + k * k)
    ph = sp.delta + 2.0 * root * np.arctan(H * t) / H
    s2 = math.sinh(2 * sp.r)
    return (
        t * math.cosh(2 * sp.r) * H * H / (2.0 * root)
        + (H * H * t / (2.0 * root) * np.cos(ph) - 0.5 * np.sin(ph)) * s2
    )


def exact_mode(oid, params, t):
    """Closed-form vacuum mode ``(u, du)``; Wronskian u du* - u* du = i."""
    oid = OracleId(oid)
    t = np.asarray(t, dtype=float)
    k, H = _kH(params)
    if oid is OracleId.CONST_OMEGA:
        w = float(params.get("omega", k))
        u = np.exp(-1j * w * t) / math.sqrt(2.0 * w)
        return u, -1j * w * u
    if oid is OracleId.INVERSE_LINEAR_EXACT:
        nu = _nu(k, H)
        s = 1.0 + 2.0 * H * t
        if np.any(s <= 0):
            raise RegimeError("t must satisfy 1 + 2 H t > 0")
        u = s ** complex(0.5, -nu / (2.0 * H)) / (math.sqrt(2.0) * nu**0.5)
        return u, (H - 1j * nu) * u / s
    if oid is OracleId.LORENTZIAN_EXACT:
        root = math.sqrt(H * H + k * k)
        s = 1.0 + H * H * t * t
        u = np.sqrt(s) / (math.sqrt(2.0) * root**0.5) * np.exp(-1j * root * np.arctan(H * t) / H)
        return u, (H * H * t - 1j * root) * u / s
    raise ParameterError(f"no closed-form mode for {oid.value}")
