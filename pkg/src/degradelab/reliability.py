"""Reliability curves, MTTF, sweep metrics and analytic slot-consumption limits."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyClass, NonIntegrable, UndefinedBaseline

# quadrature horizon in units of 1/lambda; the rest is added in closed form
HORIZON = 20.0
PANEL_TOL = 1e-9


@dataclass(frozen=True)
class MttfResult:
    analytic: float
    numeric: float

    @property
    def agreement(self) -> float:
        return abs(self.analytic - self.numeric) / abs(self.analytic)


@dataclass(frozen=True)
class ReliabilityCurve:
    failure_rate: float
    samples: tuple  # ((tau, R(tau)), ...)
    polynomial: object


def ecu_reliability(tau, failure_rate):
    """Constant-rate component: R(tau) = exp(-lambda * tau)."""
    return math.exp(-failure_rate * tau)


def curve(sf, failure_rate, taus) -> ReliabilityCurve:
    """Sample R_phi(tau) by Shannon evaluation at r = exp(-lambda*tau)."""
    samples = tuple((float(t), sf.manager.probability(sf.root, ecu_reliability(t, failure_rate)))
                    for t in taus)
    return ReliabilityCurve(failure_rate, samples, sf.polynomial())


def _adaptive_simpson(f, a, b, tol, depth=50):
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def go(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (go(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + go(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return go(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)


def numeric_mttf(sf, failure_rate, panels=20):
    """Quadrature of R_phi over [0, 20/lambda] plus the exact exponential tail."""
    poly = sf.polynomial()
    if poly.coefficients[0] != 0:
        raise NonIntegrable("structure function is true with every ECU down")
    horizon = HORIZON / failure_rate
    prob = sf.manager.probability
    root = sf.root

    def r_of(t):
        return prob(root, math.exp(-failure_rate * t))

    width = horizon / panels
    body = sum(_adaptive_simpson(r_of, i * width, (i + 1) * width, PANEL_TOL)
               for i in range(panels))
    tail = sum(c * math.exp(-k * failure_rate * horizon) / (k * failure_rate)
               for k, c in enumerate(poly.coefficients) if k)
    return body + tail


def mttf(sf, failure_rate, numeric=True) -> MttfResult:
    """MTTF from the reliability polynomial, cross-checked by quadrature."""
    if not failure_rate > 0:
        raise ValueError("failure_rate must be > 0")
    poly = sf.polynomial()
    if poly.coefficients[0] != 0:
        raise NonIntegrable("structure function is true with every ECU down")
    analytic = poly.mttf(failure_rate)
    num = numeric_mttf(sf, failure_rate) if numeric else float("nan")
    return MttfResult(analytic, num)


def mttf_avg(values) -> float:
    values = list(values)
    if not values:
        raise EmptyClass("no applications in this class")
    return math.fsum(values) / len(values)


def slots_occupied(table) -> int:
    """S_O: slots with an allocation or a reservation, overlaps counted once."""
    return table.occupied()


@dataclass(frozen=True)
class SlotAccounting:
    occupied: int
    allocation: int
    reservation: int
    overlapped: int


def slot_accounting(table) -> SlotAccounting:
    return SlotAccounting(
        occupied=table.occupied(),
        allocation=table.lane_count("allocation"),
        reservation=table.lane_count("reservation"),
        overlapped=table.overlap_count(),
    )


def overhead(s_o_mode, s_o_none):
    return s_o_mode - s_o_none


def r_savings(oh_active, oh_deg) -> float:
    """Share of the active-redundancy slot overhead that degradation avoids."""
    if oh_active <= 0:
        raise UndefinedBaseline("active redundancy adds no overhead (no critical apps)")
    return (oh_active - oh_deg) / oh_active


def mttf_reduction_nc(mttf_avg_active_nc, mttf_avg_deg_nc) -> float:
    """Signed relative change of the non-critical average MTTF; negative = worse."""
    if not mttf_avg_active_nc > 0:
        raise UndefinedBaseline("baseline MTTF must be positive")
    return -(mttf_avg_active_nc - mttf_avg_deg_nc) / mttf_avg_active_nc


def degradation_limits(n_critical, n_noncritical, tasks_per_app, slot_demand):
    """Closed-form ``(lower, upper)`` slot consumption under graceful degradation.

    Upper: no reservation overlaps anything. Lower: reservations sit on
    non-critical allocations while any remain.
    """
    if min(n_critical, n_noncritical, tasks_per_app, slot_demand) < 0:
        raise ValueError("counts must be non-negative")
    per_app = tasks_per_app * slot_demand
    base = (n_critical + n_noncritical) * per_app
    upper = base + n_critical * per_app
    lower = base + max(0, (n_critical - n_noncritical) * per_app)
    return lower, upper
