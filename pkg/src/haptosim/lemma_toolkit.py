"""Computable pieces of the a-priori estimate: ρ, the minimisation of H(y) = y + A₁y^{-δ},
and the smallness condition that selects a feasible exponent p₀ > 1.

The generic constants (C₇ and the maximal-regularity constants C_γ) cannot
be computed here; they are user inputs with default 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateDelta, InfeasibleParameters, InvalidInitialData

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
P0_CAP = 4.0


@dataclass(frozen=True)
class LemmaConstants:
    delta: float = 2.0
    chi: float = 1.0
    xi: float = 0.0
    C7: float = 1.0
    C_delta_plus_1: float = 1.0
    eta: float = 1.0
    mu: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        vals = (self.delta, self.chi, self.xi, self.C7, self.C_delta_plus_1, self.eta, self.mu, self.rho)
        if not all(math.isfinite(x) for x in vals):
            raise ValueError("lemma constants must be finite")
        if self.delta < 1:
            raise ValueError(f"delta must be >= 1, got {self.delta}")
        if self.C7 <= 0 or self.C_delta_plus_1 <= 0:
            raise ValueError("C7 and C_delta_plus_1 must be positive")
        if self.chi < 0 or self.xi < 0 or self.eta < 0:
            raise ValueError("chi, xi and eta must be nonnegative")
        if self.rho < 1:
            raise ValueError(f"rho = max(1, ||w0||) is at least 1, got {self.rho}")


@dataclass(frozen=True)
class HMinResult:
    y_star: float
    h_min: float
    h_min_oracle: float
    paper_formula_value: float
    a1: float
    # closed form that keeps the e^{ξ(δ-1)} factor carried by A₁
    weighted_formula_value: float


def rho_of(w0) -> float:
    """ρ = max{1, max w0}, the invariant upper bound for w."""
    w0 = np.asarray(w0, dtype=float)
    if not np.all(np.isfinite(w0)):
        raise InvalidInitialData("w0 contains non-finite values")
    if np.any(w0 < 0):
        raise InvalidInitialData(f"w0 must be nonnegative, min is {w0.min():g}")
    return max(1.0, float(np.max(w0)))


def a1_coefficient(c: LemmaConstants) -> float:
    d = c.delta
    bracket = d * (d - 1) / 2.0 * c.chi ** 2
    return (1.0 / (d + 1) * ((d + 1) / d) ** (-d) * bracket ** (d + 1)
            * c.C7 * c.C_delta_plus_1 * math.exp(c.xi * (d - 1)))


def H(y: float, a1: float, delta: float) -> float:
    return y + a1 * y ** (-delta)


def golden_section_min(f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-12,
                       max_iter: int = 500):
    """Minimise a unimodal f on [lo, hi] by golden-section search in log coordinates.

    Returns (argmin, min). The bracket is shrunk until hi/lo - 1 <= rtol.
    """
    s_lo, s_hi = math.log(lo), math.log(hi)
    g = lambda s: f(math.exp(s))  # noqa: E731
    s1 = s_hi - GOLDEN * (s_hi - s_lo)
    s2 = s_lo + GOLDEN * (s_hi - s_lo)
    f1, f2 = g(s1), g(s2)
    for _ in range(max_iter):
        if s_hi - s_lo <= rtol:
            break
        if f1 <= f2:
            s_hi, s2, f2 = s2, s1, f1
            s1 = s_hi - GOLDEN * (s_hi - s_lo)
            f1 = g(s1)
        else:
            s_lo, s1, f1 = s1, s2, f2
            s2 = s_lo + GOLDEN * (s_hi - s_lo)
            f2 = g(s2)
    s_best, f_best = (s1, f1) if f1 <= f2 else (s2, f2)
    return math.exp(s_best), f_best


def h_min(c: LemmaConstants) -> HMinResult:
    """Minimiser and minimum of H(y) = y + A₁y^{-δ} over y > 0.

    The critical point y* = (A₁δ)^{1/(δ+1)} gives the value. The stated
    closed form δ(δ-1)χ²/2·(C₇C_{δ+1})^{1/(δ+1)} is returned alongside; it
    agrees with H(y*) only when ξ = 0.
    """
    if c.delta == 1:
        raise DegenerateDelta("delta = 1 gives A1 = 0 and H(y) = y, whose infimum 0 is not attained")
    if c.chi == 0:
        raise ValueError("chi = 0 gives A1 = 0; the minimum is not attained")
    d = c.delta
    a1 = a1_coefficient(c)
    y_star = (a1 * d) ** (1.0 / (d + 1))
    value = H(y_star, a1, d)
    _, oracle = golden_section_min(lambda y: H(y, a1, d), 1e-8 * y_star, 1e8 * y_star)
    k = d * (d - 1) * c.chi ** 2 / 2.0
    stated = k * (c.C7 * c.C_delta_plus_1) ** (1.0 / (d + 1))
    weighted = k * (c.C7 * c.C_delta_plus_1 * math.exp(c.xi * (d - 1))) ** (1.0 / (d + 1))
    return HMinResult(y_star, value, oracle, stated, a1, weighted)


@dataclass(frozen=True)
class FeasibleP0:
    p0: float
    g_p0: float
    g_at_1: float


def smallness_margin(p: float, c: LemmaConstants, C_of_gamma: Optional[Callable[[float], float]] = None) -> float:
    """g(p) = pμ - p(p-1)χ²/2·(C₇C_{p+1})^{1/(p+1)} - (p-1)ξηρ."""
    C = (lambda gamma: 1.0) if C_of_gamma is None else C_of_gamma
    return (p * c.mu - p * (p - 1) * c.chi ** 2 / 2.0 * (c.C7 * C(p + 1.0)) ** (1.0 / (p + 1))
            - (p - 1) * c.xi * c.eta * c.rho)


def feasible_p0(c: LemmaConstants, C_of_gamma: Optional[Callable[[float], float]] = None,
                n_scan: int = 300, bisect_iter: int = 200) -> Optional[FeasibleP0]:
    """Largest p in (1, 4] before g first changes sign, with g(p₀) > 0 re-checked.

    ``C_of_gamma`` maps γ to C_γ and is called with γ = p + 1 (default: 1).
    Returns None if g cannot be evaluated to a finite number.
    """
    if not c.mu > 0:
        raise InfeasibleParameters(f"mu must be positive, got {c.mu}")
    g = lambda p: smallness_margin(p, c, C_of_gamma)  # noqa: E731
    try:
        g1 = g(1.0)
        grid = np.linspace(1.0, P0_CAP, n_scan + 1)[1:]
        lo = 1.0
        hi = None
        for p in grid:
            val = g(float(p))
            if not math.isfinite(val):
                return None
            if val <= 0:
                hi = float(p)
                break
            lo = float(p)
        if hi is None:
            p0 = P0_CAP
        else:
            for _ in range(bisect_iter):
                mid = 0.5 * (lo + hi)
                if mid in (lo, hi):
                    break
                if g(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            p0 = lo
        gp0 = g(p0)
    except (OverflowError, ValueError, ZeroDivisionError):
        return None
    if not (math.isfinite(gp0) and gp0 > 0):
        return None
    return FeasibleP0(p0, gp0, g1)
