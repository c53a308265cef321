"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

import math
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np
from mpmath import mp
from pydantic import BaseModel, Field
from scipy import integrate, optimize

SQRT3 = math.sqrt(3.0)
# exp(T(0)), the upper end of the domain of S
S_DOMAIN_MAX = math.exp(SQRT3 * math.pi / 9.0)


class MgfConfig(BaseModel):
    """Numerical settings for T, S, f and M."""

    root_tolerance: float = Field(default=1e-15, gt=0)
    max_iterations: int = Field(default=200, ge=1)
    quadrature_nodes: int = Field(default=64, ge=16)
    series_order: int = Field(default=12, ge=0)
    fit_radius: float = Field(default=0.15, gt=0, lt=0.5)
    fit_nodes: int = Field(default=48, ge=16)
    fit_degree: int = Field(default=16, ge=1)
    precision_digits: int = Field(default=50, ge=20)


DEFAULT_CONFIG = MgfConfig()


def _big_T(t: float) -> float:
    return (
        -0.5 * math.log(t * t - t + 1.0)
        - (SQRT3 / 3.0) * (math.atan((2.0 * t - 1.0) / SQRT3) - math.pi / 6.0)
    )


def big_T_derivative(t: float) -> float:
    return -t / (t * t - t + 1.0)


def big_T(t: float) -> float:
    """T(t) = ∫_t^1 s / (s² - s + 1) ds in closed form."""
    if t <= 0:
        raise ValueError(f"T is evaluated for t > 0, got {t}")
    return _big_T(t)


def big_T_quadrature(t: float, config: MgfConfig = DEFAULT_CONFIG) -> float:
    """T(t) by adaptive quadrature of its integrand, as an oracle for the closed form."""
    value, _ = integrate.quad(
        lambda s: s / (s * s - s + 1.0), t, 1.0,
        epsabs=1e-14, epsrel=1e-14, limit=config.quadrature_nodes,
    )
    return value


@lru_cache(maxsize=1)
def working_interval() -> Tuple[float, float]:
    """Validate the range of exp∘T on [0, ∞) and return it as (0, exp(T(0)))."""
    upper = math.exp(_big_T(0.0))
    if abs(upper - S_DOMAIN_MAX) > 1e-12:
        raise RuntimeError(f"exp(T(0)) = {upper} disagrees with exp(√3π/9) = {S_DOMAIN_MAX}")
    grid = np.linspace(0.0, 50.0, 2001)
    values = np.exp([_big_T(t) for t in grid])
    if not np.all(np.diff(values) < 0):
        raise RuntimeError("exp(T) is not strictly decreasing on the working interval")
    return 0.0, upper


def big_S(u: float, config: MgfConfig = DEFAULT_CONFIG) -> float:
    """The s >= 0 with exp(T(s)) = u, by bracketing then Newton polish."""
    _, upper = working_interval()
    if not 0 < u <= upper * (1.0 + 1e-14):
        raise ValueError(f"S is defined on (0, {upper:.15g}], got {u}")
    target = math.log(u)
    if target >= _big_T(0.0):
        return 0.0

    def gap(s: float) -> float:
        return _big_T(s) - target

    high = 4.0
    for _ in range(config.max_iterations):
        if gap(high) < 0:
            break
        high *= 2.0
    else:
        raise RuntimeError(f"Could not bracket S({u}) within {config.max_iterations} doublings")
    root = optimize.brentq(gap, 0.0, high, xtol=config.root_tolerance,
                           maxiter=config.max_iterations)
    if root > 1e-8:
        polished, status = optimize.newton(gap, root, fprime=big_T_derivative,
                                           tol=config.root_tolerance, maxiter=8,
                                           full_output=True, disp=False)
        if status.converged:
            root = polished
    return float(root)


def _check_f_domain(z: float, x: float) -> None:
    if not 0 < z < 0.25:
        raise ValueError(f"f(z, x) needs z in (0, 1/4), got {z}")
    if not 0 <= x <= 1:
        raise ValueError(f"f(z, x) needs x in [0, 1], got {x}")


def f_of(z: float, x: float, config: MgfConfig = DEFAULT_CONFIG) -> float:
    """Generating function Σ P_n(x) z^n in its implicit closed form."""
    _check_f_domain(z, x)
    xi = math.sqrt(2.0 * z * x + 1.0 - 2.0 * z)
    return 1.0 / (xi * big_S(xi / math.sqrt(1.0 - 2.0 * z), config))


def integral_equation_residual(z: float, x: float, config: MgfConfig = DEFAULT_CONFIG) -> float:
    """f - 1 - z [∫_0^x f(z, t) dt + (1 - √(2zx + 1 - 2z)) / z] f at one point."""
    _check_f_domain(z, x)
    area = 0.0
    if x > 0:
        area, _ = integrate.quad(lambda t: f_of(z, t, config), 0.0, x,
                                 epsabs=1e-13, epsrel=1e-13, limit=config.quadrature_nodes)
    value = f_of(z, x, config)
    tail = (1.0 - math.sqrt(2.0 * z * x + 1.0 - 2.0 * z)) / z
    return value - 1.0 - z * (area + tail) * value


def mgf(z: float, config: MgfConfig = DEFAULT_CONFIG) -> float:
    """M(z) = 1 / S(1 / √(1 - 2z²)) with M(0) = 1."""
    if not abs(z) < 0.5:
        raise ValueError(f"M(z) needs |z| < 1/2, got {z}")
    if z == 0:
        return 1.0
    return 1.0 / big_S(1.0 / math.sqrt(1.0 - 2.0 * z * z), config)


def curvature_at_zero(h: float = 1e-3, config: MgfConfig = DEFAULT_CONFIG) -> float:
    """Central second difference of M at 0, close to twice the second moment."""
    return (mgf(h, config) - 2.0 + mgf(-h, config)) / (h * h)


def abel_residual(t: float, C: float = 1.0, h: float = 1e-3) -> float:
    """u u' - u + ξ along ξ = C e^{T(t)}, u = t ξ, with u' = du/dξ by finite differences."""
    if t <= 2 * h:
        raise ValueError(f"t must exceed the stencil width {2 * h}, got {t}")

    def xi(s: float) -> float:
        return C * math.exp(_big_T(s))

    def u(s: float) -> float:
        return s * xi(s)

    def stencil(g, s: float) -> float:
        return (-g(s + 2 * h) + 8 * g(s + h) - 8 * g(s - h) + g(s - 2 * h)) / (12 * h)

    slope = stencil(u, t) / stencil(xi, t)
    return u(t) * slope - u(t) + xi(t)


def _big_T_mp(t):
    return (-mp.log(t * t - t + 1) / 2
            - (mp.sqrt(3) / 3) * (mp.atan((2 * t - 1) / mp.sqrt(3)) - mp.pi / 6))


def _big_S_mp(u, config: MgfConfig):
    """Newton refinement of S(u) in the working precision of mpmath."""
    target = mp.log(u)
    s = mp.mpf(big_S(float(u), config))
    tolerance = mp.mpf(10) ** (-(config.precision_digits - 5))
    for _ in range(config.max_iterations):
        step = (_big_T_mp(s) - target) / (-s / (s * s - s + 1))
        s -= step
        if abs(step) < tolerance:
            return s
    raise RuntimeError(f"S({u}) did not converge in {config.max_iterations} Newton steps")


def mgf_series(config: MgfConfig = DEFAULT_CONFIG) -> Dict[int, float]:
    """Taylor coefficients of M up to config.series_order.

    M depends on z² only, so a polynomial in w = z² is fitted by least squares on
    Chebyshev nodes of [0, r²]. Coefficients of high order are tiny on that disc, so
    M is sampled in extended precision.
    """
    half = config.series_order // 2
    degree = max(config.fit_degree, half + 4)
    if config.fit_nodes <= degree:
        raise ValueError(f"fit_nodes must exceed the fit degree {degree}")
    with mp.workdps(config.precision_digits):
        span = mp.mpf(config.fit_radius) ** 2
        rows, values = [], []
        for j in range(config.fit_nodes):
            w = span * (1 - mp.cos((2 * j + 1) * mp.pi / (2 * config.fit_nodes))) / 2
            rows.append([(w / span) ** k for k in range(degree + 1)])
            values.append(1 / _big_S_mp(1 / mp.sqrt(1 - 2 * w), config))
        solution, _ = mp.qr_solve(mp.matrix(rows), mp.matrix(values))
        series = {}
        for order in range(config.series_order + 1):
            if order % 2:
                series[order] = 0.0
            else:
                series[order] = float(solution[order // 2] / span ** (order // 2))
    return series


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference) if reference else abs(value)
