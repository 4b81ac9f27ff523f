"""Forward rate models for a free-running detector under holdoff and their
inversion to the intrinsic detection efficiency.

Two forward models are provided.  The original model suppresses the signal
term by the probability of no dark count during one full holdoff interval.
The amended model reduces that suppression by the fraction of time the
detector is already blind due to signal-induced holdoff, which matters at
high repetition rates and large mean photon numbers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

from .core import (
    METHOD_AMENDED,
    METHOD_ORIGINAL,
    DetectorParams,
    EfficiencyEstimate,
    PulseTrainParams,
)
from .errors import (
    InvalidInputError,
    NumericFailureError,
    SaturationError,
    SignalBelowBackgroundError,
)

# Convergence targets for the numeric inversion of the amended model.
RATE_REL_TOL = 1e-12
ETA_BRACKET_TOL = 1e-14
MAX_BISECT_ITER = 200

# The published amended model carries a bare "D" inside the dark-suppression
# exponent, which is dimensionally inconsistent (a time subtracted from a pure
# number).  This implementation uses the blocked *fraction* p0/(1+m*p0)*f*D,
# matching the second term of the same model.
AMENDED_EXPONENT_USES_RATE_FRACTION = True


@dataclass(frozen=True)
class ModelInputs:
    """Observed click rate plus the detector/pulse-train configuration.

    ``duration_s`` is optional; when given, the statistical uncertainty of the
    inverted efficiency is propagated from the binomial spread of the click
    count, otherwise ``u_eta`` is reported as 0.
    """

    detector: DetectorParams
    pulses: PulseTrainParams
    n_click_hz: float
    duration_s: Optional[float] = None

    def __post_init__(self):
        if self.n_click_hz < 0:
            raise InvalidInputError("n_click_hz must be nonnegative")
        bound = self.pulses.rep_rate_hz + self.detector.dark_rate_hz
        if self.n_click_hz > bound:
            warnings.warn(
                f"click rate {self.n_click_hz} /s exceeds rep rate + dark rate "
                f"({bound} /s)",
                stacklevel=2,
            )
        if self.duration_s is not None and self.duration_s <= 0:
            raise InvalidInputError("duration_s must be positive")


def click_prob_single_pulse(n_ph: float, eta: float) -> float:
    """Poissonian click probability p0 = 1 - exp(-n_ph * eta)."""
    if n_ph < 0:
        raise InvalidInputError("n_ph must be nonnegative")
    if not 0.0 <= eta <= 1.0:
        raise InvalidInputError("eta must lie in [0, 1]")
    return -math.expm1(-n_ph * eta)


def overcycle_m(holdoff_ps: int, rep_rate_hz: float) -> int:
    """Number of whole pulse intervals shadowed by one holdoff period.

    m = ceil(D * f) - 1, clamped to >= 0.  A pulse arriving exactly at the end
    of the holdoff is treated as detectable, so at integer D * f the boundary
    pulse does not count as shadowed.
    """
    if holdoff_ps <= 0 or rep_rate_hz <= 0:
        raise InvalidInputError("holdoff_ps and rep_rate_hz must be positive")
    x = holdoff_ps * rep_rate_hz / 1e12
    # snap to the nearest integer to keep exact products exact despite
    # binary rounding of e.g. 20e-6 * 150e3
    nearest = round(x)
    if abs(x - nearest) <= 1e-9 * max(1.0, abs(x)):
        x = nearest
    return max(math.ceil(x) - 1, 0)


def _signal_fraction(p0: float, m: int) -> float:
    return p0 / (1.0 + m * p0)


def predict_rate_original(
    detector: DetectorParams, pulses: PulseTrainParams, eta: float
) -> float:
    """Observed click rate under the original statistical model."""
    p0 = click_prob_single_pulse(pulses.n_ph, eta)
    m = overcycle_m(detector.holdoff_ps, pulses.rep_rate_hz)
    f = pulses.rep_rate_hz
    d_s = detector.holdoff_ps * 1e-12
    n_dark = detector.dark_rate_hz
    frac = _signal_fraction(p0, m)
    return f * frac * math.exp(-n_dark * d_s) + n_dark * (1.0 - frac * f * d_s)


def predict_rate_amended(
    detector: DetectorParams, pulses: PulseTrainParams, eta: float
) -> float:
    """Observed click rate with signal-induced blocking of dark counts.

    The dark-suppression exponent is scaled by (1 - p0/(1+m*p0)*f*D), the
    fraction of time not already blocked by signal-induced holdoff.
    """
    p0 = click_prob_single_pulse(pulses.n_ph, eta)
    m = overcycle_m(detector.holdoff_ps, pulses.rep_rate_hz)
    f = pulses.rep_rate_hz
    d_s = detector.holdoff_ps * 1e-12
    n_dark = detector.dark_rate_hz
    frac = _signal_fraction(p0, m)
    blocked = frac * f * d_s
    return (
        f * frac * math.exp(-n_dark * d_s * (1.0 - blocked))
        + n_dark * (1.0 - blocked)
    )


def eta_from_click_prob(p_click: float, n_ph: float) -> float:
    """Invert the Poissonian click probability: eta = -ln(1 - p) / n_ph."""
    if not 0.0 <= p_click < 1.0:
        raise InvalidInputError("p_click must lie in [0, 1)")
    if n_ph <= 0:
        raise InvalidInputError("n_ph must be positive")
    return -math.log1p(-p_click) / n_ph


def _invert_original_point(inputs: ModelInputs, n_click_hz: float) -> float:
    det, pulses = inputs.detector, inputs.pulses
    f = pulses.rep_rate_hz
    d_s = det.holdoff_ps * 1e-12
    n_dark = det.dark_rate_hz
    m = overcycle_m(det.holdoff_ps, f)
    denom = math.exp(-n_dark * d_s) - n_dark * d_s
    if denom <= 0:
        raise SaturationError("dark-count load too high for the closed-form inverse")
    a = ((n_click_hz - n_dark) / f) / denom
    om = 1.0 - m * a
    if om <= 0:
        raise SaturationError("click rate inconsistent with model (overcycle saturation)")
    q = a / om
    if q >= 1.0:
        raise SaturationError("click rate inconsistent with model (probability >= 1)")
    eta = -math.log1p(-q) / pulses.n_ph
    if eta > 1.0:
        raise SaturationError(f"inverted efficiency {eta:.4g} exceeds 1")
    return eta


def _count_sigma_hz(inputs: ModelInputs) -> Optional[float]:
    """1-sigma binomial spread of the click rate, or None without duration."""
    if inputs.duration_s is None:
        return None
    f, t = inputs.pulses.rep_rate_hz, inputs.duration_s
    p = min(max(inputs.n_click_hz / f, 0.0), 1.0)
    n_pulses = f * t
    return math.sqrt(n_pulses * p * (1.0 - p)) / t


def _finite_diff_u_eta(
    inputs: ModelInputs, invert_point: Callable[[ModelInputs, float], float]
) -> float:
    sigma = _count_sigma_hz(inputs)
    if sigma is None or sigma == 0.0:
        return 0.0
    eta_mid = invert_point(inputs, inputs.n_click_hz)
    try:
        eta_hi = invert_point(inputs, inputs.n_click_hz + sigma)
    except SaturationError:
        eta_hi = None
    lo_rate = inputs.n_click_hz - sigma
    eta_lo = invert_point(inputs, lo_rate) if lo_rate > inputs.detector.dark_rate_hz else None
    if eta_hi is not None and eta_lo is not None:
        return abs(eta_hi - eta_lo) / 2.0
    if eta_hi is not None:
        return abs(eta_hi - eta_mid)
    if eta_lo is not None:
        return abs(eta_mid - eta_lo)
    return 0.0


def _n_events(inputs: ModelInputs) -> int:
    if inputs.duration_s is None:
        return 0
    return int(round(inputs.n_click_hz * inputs.duration_s))


def _check_invertible(inputs: ModelInputs) -> None:
    if inputs.pulses.n_ph <= 0:
        raise InvalidInputError("n_ph must be positive for inversion")
    if inputs.n_click_hz <= inputs.detector.dark_rate_hz:
        raise SignalBelowBackgroundError(
            f"click rate {inputs.n_click_hz} /s does not exceed the dark rate "
            f"{inputs.detector.dark_rate_hz} /s"
        )


def invert_original(inputs: ModelInputs) -> EfficiencyEstimate:
    """Closed-form inversion of the original model."""
    _check_invertible(inputs)
    eta = _invert_original_point(inputs, inputs.n_click_hz)
    u_eta = _finite_diff_u_eta(inputs, _invert_original_point)
    return EfficiencyEstimate(
        eta=eta, u_eta=u_eta, method=METHOD_ORIGINAL, n_events_used=_n_events(inputs)
    )


def _invert_amended_point(inputs: ModelInputs, n_click_hz: float) -> float:
    det, pulses = inputs.detector, inputs.pulses
    eta_hi = min(1.0, 50.0 / pulses.n_ph)

    def resid(eta: float) -> float:
        return predict_rate_amended(det, pulses, eta) - n_click_hz

    lo, hi = 0.0, eta_hi
    f_lo, f_hi = resid(lo), resid(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo > 0 or f_hi < 0:
        raise SaturationError("observed rate outside the model's range over [0, eta_hi]")
    # the model is strictly increasing in eta, so plain bisection is safe
    for _ in range(MAX_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        f_mid = resid(mid)
        if abs(f_mid) < RATE_REL_TOL * max(n_click_hz, 1e-300):
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < ETA_BRACKET_TOL:
            return 0.5 * (lo + hi)
    raise NumericFailureError("bisection failed to converge; monotone model violated?")


def invert_amended(inputs: ModelInputs) -> EfficiencyEstimate:
    """Numeric inversion of the amended model by bracketed bisection."""
    _check_invertible(inputs)
    eta = _invert_amended_point(inputs, inputs.n_click_hz)
    u_eta = _finite_diff_u_eta(inputs, _invert_amended_point)
    return EfficiencyEstimate(
        eta=eta, u_eta=u_eta, method=METHOD_AMENDED, n_events_used=_n_events(inputs)
    )
