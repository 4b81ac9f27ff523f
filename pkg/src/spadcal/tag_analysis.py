"""Single-pass analyses over tag streams: ex-post trigger validation, dark
count dynamics and inter-event interval statistics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .core import (
    CLICK_CHANNEL,
    METHOD_EXPOST,
    DarkCountHistogram,
    DetectorParams,
    EfficiencyEstimate,
    PulseTrainParams,
    TagStream,
    BASELINE_BINS,
)
from .errors import (
    ConfigurationError,
    DegenerateResultError,
    EmptyStreamError,
    InvalidInputError,
)
from .models import eta_from_click_prob

_NEG = _kernels._NEG


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the ex-post trigger validation scan."""

    n_trigger: int
    n_trigger_inv: int
    n_signal: int
    p_click_true: float
    valid_trigger_indices: Optional[np.ndarray] = None

    @property
    def n_valid(self) -> int:
        return self.n_trigger - self.n_trigger_inv


@dataclass(frozen=True)
class IntervalStats:
    """Mean time from a signal detection back to the previous click."""

    mean_prev_interval_ps: float
    rel_std_of_mean: float
    n_signal_events: int


def validate_triggers(
    stream: TagStream,
    det: DetectorParams,
    collect_indices: bool = False,
    _t_last_click_init: int = _NEG,
) -> ValidationReport:
    """Flag triggers shadowed by the holdoff of any previous click.

    A trigger at time t is invalid iff t - t_last_click < holdoff, where the
    shadowing event is the most recent click of any origin (signal or dark).
    The boundary interval exactly equal to the holdoff is valid.  At most one
    click is credited per valid trigger window.
    """
    if len(stream) == 0:
        raise EmptyStreamError("cannot validate an empty stream")
    idx = np.empty(len(stream) if collect_indices else 1, dtype=np.int64)
    n_trigger, n_invalid, n_signal, n_valid, _ = _kernels.validate_scan(
        stream.channel,
        stream.t_ps,
        det.holdoff_ps,
        det.window_offset_ps,
        det.window_width_ps,
        _t_last_click_init,
        idx,
        collect_indices,
    )
    if n_valid == 0:
        raise DegenerateResultError("no valid triggers in stream")
    return ValidationReport(
        n_trigger=n_trigger,
        n_trigger_inv=n_invalid,
        n_signal=n_signal,
        p_click_true=n_signal / n_valid,
        valid_trigger_indices=idx[:n_valid].copy() if collect_indices else None,
    )


def measured_rates(
    stream: TagStream,
    det: DetectorParams,
    pulses: PulseTrainParams,
    dark_stream: Optional[TagStream] = None,
) -> Tuple[float, float]:
    """Observed click rate and dark-count rate in events per second.

    The dark rate comes from a dedicated untriggered stream when supplied.
    Otherwise it is estimated from clicks outside all signal windows, scaled
    by the fraction of time not covered by windows.
    """
    if stream.duration_ps <= 0:
        raise InvalidInputError("stream duration must be positive")
    duration_s = stream.duration_ps * 1e-12
    n_click_hz = stream.n_clicks / duration_s

    if dark_stream is not None:
        if dark_stream.duration_ps <= 0:
            raise InvalidInputError("dark stream duration must be positive")
        if dark_stream.n_triggers:
            warnings.warn("dark stream contains trigger events", stacklevel=2)
        n_dark_hz = dark_stream.n_clicks / (dark_stream.duration_ps * 1e-12)
        return n_click_hz, n_dark_hz

    report = None
    try:
        report = validate_triggers(stream, det)
    except (EmptyStreamError, DegenerateResultError):
        pass
    if report is None:
        return n_click_hz, n_click_hz
    n_outside = stream.n_clicks - report.n_signal
    window_time_ps = report.n_valid * det.window_width_ps
    live_ps = stream.duration_ps - window_time_ps
    n_dark_hz = n_outside / (live_ps * 1e-12) if live_ps > 0 else 0.0
    return n_click_hz, n_dark_hz


def dark_histogram(
    stream: TagStream,
    det: DetectorParams,
    pulses: Optional[PulseTrainParams],
    span_ps: int,
    bin_width_ps: int = 10000,
) -> DarkCountHistogram:
    """Conditional dark-count histogram after each successful trigger.

    For every trigger whose signal window contains a click, all later clicks
    within ``span_ps`` of that click are binned; counts are normalized by the
    number of successful triggers.
    """
    if span_ps <= 0 or bin_width_ps <= 0:
        raise InvalidInputError("span_ps and bin_width_ps must be positive")
    n_bins = span_ps // bin_width_ps
    if n_bins < BASELINE_BINS:
        raise ConfigurationError(
            f"span of {n_bins} bins is too short for a {BASELINE_BINS}-bin baseline"
        )
    if pulses is not None and span_ps > 1e12 / pulses.rep_rate_hz:
        raise ConfigurationError("span exceeds the pulse repetition interval")
    counts = np.zeros(n_bins, dtype=np.int64)
    n_success = _kernels.dark_hist_scan(
        stream.channel,
        stream.t_ps,
        det.window_offset_ps,
        det.window_width_ps,
        n_bins * bin_width_ps,
        bin_width_ps,
        counts,
    )
    if n_success == 0:
        raise DegenerateResultError("no successful triggers to condition on")
    return DarkCountHistogram(
        probs=counts / n_success,
        bin_width_ps=bin_width_ps,
        n_conditioning_events=n_success,
    )


def surplus_darkcount(hist: DarkCountHistogram) -> np.ndarray:
    """Running sum of (per-bin probability - baseline), one value per bin."""
    return np.cumsum(hist.probs - hist.baseline)


def mean_prev_event_interval(stream: TagStream, det: DetectorParams) -> IntervalStats:
    """Average interval from each signal-window click to the preceding click.

    The preceding click may be signal or dark.  Also reports the relative
    standard deviation of the mean.
    """
    if stream.n_clicks < 2:
        raise DegenerateResultError("need at least 2 clicks")
    intervals = np.empty(stream.n_clicks, dtype=np.int64)
    m = _kernels.prev_interval_scan(
        stream.channel,
        stream.t_ps,
        det.window_offset_ps,
        det.window_width_ps,
        intervals,
    )
    if m == 0:
        raise DegenerateResultError("no signal-window clicks with a preceding event")
    intervals = intervals[:m]
    mean = float(intervals.mean())
    if mean < det.holdoff_ps:
        warnings.warn(
            f"mean interval {mean:.0f} ps is below the holdoff {det.holdoff_ps} ps",
            stacklevel=2,
        )
    std_of_mean = float(intervals.std(ddof=1)) / math.sqrt(m) if m > 1 else 0.0
    return IntervalStats(
        mean_prev_interval_ps=mean,
        rel_std_of_mean=std_of_mean / mean if mean > 0 else 0.0,
        n_signal_events=m,
    )


def eta_expost(stream: TagStream, det: DetectorParams, n_ph: float) -> EfficiencyEstimate:
    """Efficiency from ex-post validated triggers.

    Inverts the Poissonian click probability of the validated triggers; the
    uncertainty is the binomial standard deviation of p propagated through
    the logarithm.
    """
    report = validate_triggers(stream, det)
    p = report.p_click_true
    eta = eta_from_click_prob(p, n_ph)
    sigma_p = math.sqrt(p * (1.0 - p) / report.n_valid)
    u_eta = sigma_p / (n_ph * (1.0 - p))
    return EfficiencyEstimate(
        eta=eta, u_eta=u_eta, method=METHOD_EXPOST, n_events_used=report.n_valid
    )
