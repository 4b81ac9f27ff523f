"""Seedable Monte-Carlo generator of tag streams.

The simulated detector advances on a fixed 10 ns grid.  At each pulse epoch an
armed detector first draws a signal detection with probability
p0 = 1 - exp(-n_ph * eta); at every armed step a dark count is drawn from the
conditional dark-count histogram indexed by the time since the last detection,
falling back to the histogram baseline beyond its span.  Every click (signal
or dark) restarts the holdoff and the conditioning clock.

The kernel does not literally draw one Bernoulli per 10 ns step; the next dark
count is sampled by inverse CDF over the per-bin hazards, which is
statistically identical and fast enough for hundred-second streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .core import (
    BASELINE_BINS,
    DarkCountHistogram,
    DetectorParams,
    PulseTrainParams,
    TagStream,
)
from .errors import ConfigurationError, InvalidInputError

#: simulation step width; equals the dark-histogram bin width
STEP_PS = 10000


@dataclass(frozen=True)
class SimConfig:
    """Full configuration of one simulation run.

    Exactly one of ``eta`` (constant) or ``eta_profile`` must be given; a
    profile is a sequence of (interval_ps, eta) knots interpolated linearly
    over the realized interval since the previous click and clamped at the
    ends.  Histogram bins inside the holdoff are forced to zero.
    """

    detector: DetectorParams
    pulses: PulseTrainParams
    dark_model: DarkCountHistogram
    duration_s: float
    seed: int
    eta: Optional[float] = None
    eta_profile: Optional[Sequence[Tuple[float, float]]] = None
    quantize_ps: int = 250

    def __post_init__(self):
        if (self.eta is None) == (self.eta_profile is None):
            raise ConfigurationError("exactly one of eta / eta_profile is required")
        if self.eta is not None and not 0.0 <= self.eta <= 1.0:
            raise ConfigurationError("eta must lie in [0, 1]")
        if self.duration_s <= 0:
            raise ConfigurationError("duration_s must be positive")
        if not 0 <= self.seed < 2**32:
            raise ConfigurationError("seed must fit in 32 bits")
        if self.quantize_ps <= 0 or STEP_PS % self.quantize_ps:
            raise ConfigurationError(
                f"quantize_ps must be a positive divisor of the {STEP_PS} ps step"
            )
        if self.dark_model.bin_width_ps != STEP_PS:
            raise ConfigurationError(
                f"dark model bin width must equal the {STEP_PS} ps simulation step"
            )
        if self.detector.holdoff_ps % STEP_PS:
            raise ConfigurationError("holdoff must be a multiple of the simulation step")
        if self.eta_profile is not None:
            knots = list(self.eta_profile)
            if len(knots) < 2:
                raise ConfigurationError("eta_profile needs at least two knots")
            xs = np.array([k[0] for k in knots], dtype=np.float64)
            ys = np.array([k[1] for k in knots], dtype=np.float64)
            if np.any(np.diff(xs) <= 0):
                raise ConfigurationError("profile intervals must be strictly increasing")
            if ys.min() < 0 or ys.max() > 1:
                raise ConfigurationError("profile efficiencies must lie in [0, 1]")
        # detector blind during holdoff: zero the covered histogram bins
        blind = self.detector.holdoff_ps // STEP_PS
        if blind and np.any(self.dark_model.probs[:blind] != 0):
            probs = self.dark_model.probs.copy()
            probs[:blind] = 0.0
            object.__setattr__(
                self,
                "dark_model",
                DarkCountHistogram(
                    probs=probs,
                    bin_width_ps=self.dark_model.bin_width_ps,
                    n_conditioning_events=self.dark_model.n_conditioning_events,
                ),
            )

    def profile_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.eta_profile is None:
            return np.empty(0), np.empty(0)
        xs = np.array([k[0] for k in self.eta_profile], dtype=np.float64)
        ys = np.array([k[1] for k in self.eta_profile], dtype=np.float64)
        return xs, ys


def synth_dark_model(
    baseline_rate_hz: float,
    afterpulse_amp: float,
    afterpulse_tau_ps: int,
    holdoff_ps: int,
    span_ps: int,
) -> DarkCountHistogram:
    """Synthetic conditional dark-count histogram.

    Per-bin probability: baseline_rate * dt plus an exponential afterpulse
    excess amp * exp(-(tau - D) / tau_ap) for tau >= D, zero inside the
    holdoff.
    """
    if baseline_rate_hz < 0 or afterpulse_amp < 0:
        raise InvalidInputError("rates and amplitudes must be nonnegative")
    if afterpulse_tau_ps <= 0 or holdoff_ps <= 0:
        raise InvalidInputError("afterpulse_tau_ps and holdoff_ps must be positive")
    n_bins = span_ps // STEP_PS
    if span_ps < holdoff_ps + BASELINE_BINS * STEP_PS:
        raise InvalidInputError(
            f"span must cover the holdoff plus {BASELINE_BINS} baseline bins"
        )
    tau = np.arange(n_bins, dtype=np.float64) * STEP_PS
    probs = np.full(n_bins, baseline_rate_hz * STEP_PS * 1e-12)
    armed = tau >= holdoff_ps
    probs[armed] += afterpulse_amp * np.exp(-(tau[armed] - holdoff_ps) / afterpulse_tau_ps)
    probs[~armed] = 0.0
    if probs.max() > 1.0:
        raise ConfigurationError("per-bin probability exceeds 1; reduce rates")
    return DarkCountHistogram(probs=probs, bin_width_ps=STEP_PS)


def flat_dark_model(baseline_rate_hz: float, holdoff_ps: int,
                    span_ps: Optional[int] = None) -> DarkCountHistogram:
    """Afterpulse-free histogram; convenience wrapper around synth_dark_model."""
    if span_ps is None:
        span_ps = holdoff_ps + 2 * BASELINE_BINS * STEP_PS
    return synth_dark_model(baseline_rate_hz, 0.0, STEP_PS, holdoff_ps, span_ps)


def simulate_stream(cfg: SimConfig) -> TagStream:
    """Run one simulation and return the resulting tag stream.

    Deterministic: the same config (including seed) yields a bit-identical
    stream on either backend.
    """
    n_steps = int(round(cfg.duration_s * 1e12)) // STEP_PS
    f = cfg.pulses.rep_rate_hz
    holdoff_steps = cfg.detector.holdoff_ps // STEP_PS
    n_epochs = int(math.floor((n_steps - 1) * f / 1e8)) + 1 if n_steps > 0 else 0

    probs = np.minimum(cfg.dark_model.probs, 1.0 - 1e-15)
    neg_log_surv = -np.cumsum(np.log1p(-probs))
    baseline = cfg.dark_model.baseline
    log1m_base = math.log1p(-min(baseline, 1.0 - 1e-15)) if baseline > 0 else 0.0

    prof_x, prof_y = cfg.profile_arrays()
    use_profile = cfg.eta_profile is not None
    eta_const = cfg.eta if cfg.eta is not None else 0.0

    max_tags = n_epochs + n_steps // holdoff_steps + 16
    channel = np.empty(max_tags, dtype=np.uint8)
    t_steps = np.empty(max_tags, dtype=np.int64)
    n = _kernels.simulate_events(
        n_steps,
        float(f),
        n_epochs,
        holdoff_steps,
        float(cfg.pulses.n_ph),
        float(eta_const),
        use_profile,
        prof_x,
        prof_y,
        neg_log_surv,
        log1m_base,
        cfg.seed,
        channel,
        t_steps,
    )
    t_ps = t_steps[:n] * STEP_PS
    if cfg.quantize_ps > 1:
        t_ps = (t_ps // cfg.quantize_ps) * cfg.quantize_ps
    return TagStream(
        channel=channel[:n].copy(),
        t_ps=t_ps,
        duration_ps=n_steps * STEP_PS,
    )
