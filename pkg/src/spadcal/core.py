"""Shared domain types, photon-flux computation and uncertainty helpers.

Timestamps are integer picoseconds throughout; no floating-point time is used
in stream processing, so multi-hundred-second streams stay exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DegenerateResultError, InvalidInputError, OrderingError

# CODATA exact SI values
PLANCK_J_S = 6.62607015e-34
SPEED_OF_LIGHT_M_S = 299792458.0

TRIGGER_CHANNEL = 0
CLICK_CHANNEL = 1

#: number of trailing histogram bins averaged into the dark-count baseline
BASELINE_BINS = 5000

METHOD_ORIGINAL = "original"
METHOD_AMENDED = "amended"
METHOD_EXPOST = "expost"
_METHODS = (METHOD_ORIGINAL, METHOD_AMENDED, METHOD_EXPOST)


class TimeTag(NamedTuple):
    """One time-tagged event: channel 0 is a trigger, channel 1 a click."""

    channel: int
    t_ps: int


@dataclass(frozen=True)
class TagStream:
    """Ordered sequence of time tags plus the total observation span.

    ``channel`` and ``t_ps`` are parallel numpy arrays (uint8 / int64).  Tags
    must be sorted by timestamp; at equal timestamps a trigger sorts before a
    click.  Arrays are frozen read-only on construction.
    """

    channel: np.ndarray
    t_ps: np.ndarray
    duration_ps: int

    def __post_init__(self):
        ch = np.ascontiguousarray(self.channel, dtype=np.uint8)
        t = np.ascontiguousarray(self.t_ps, dtype=np.int64)
        if ch.ndim != 1 or t.ndim != 1 or ch.shape[0] != t.shape[0]:
            raise InvalidInputError("channel and t_ps must be 1-d arrays of equal length")
        if ch.size and ch.max() > CLICK_CHANNEL:
            bad = int(np.argmax(ch > CLICK_CHANNEL))
            raise InvalidInputError(f"unknown channel {ch[bad]} at tag index {bad}")
        if t.size:
            if t[0] < 0:
                raise InvalidInputError("timestamps must be nonnegative")
            dt = np.diff(t)
            if dt.size and dt.min() < 0:
                bad = int(np.argmax(dt < 0)) + 1
                raise OrderingError(f"decreasing timestamp at tag index {bad}")
            # at equal timestamps the trigger must precede the click
            ties = np.flatnonzero((dt == 0) & (ch[:-1] > ch[1:]))
            if ties.size:
                raise OrderingError(
                    f"click precedes trigger at equal timestamp, tag index {int(ties[0]) + 1}"
                )
            if self.duration_ps < int(t[-1]):
                raise InvalidInputError("duration_ps is smaller than the last timestamp")
        if self.duration_ps < 0:
            raise InvalidInputError("duration_ps must be nonnegative")
        ch.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "channel", ch)
        object.__setattr__(self, "t_ps", t)
        object.__setattr__(self, "duration_ps", int(self.duration_ps))

    @classmethod
    def from_tags(cls, tags: Sequence[TimeTag], duration_ps: Optional[int] = None) -> "TagStream":
        ch = np.array([tag.channel for tag in tags], dtype=np.uint8)
        t = np.array([tag.t_ps for tag in tags], dtype=np.int64)
        if duration_ps is None:
            duration_ps = int(t[-1]) if t.size else 0
        return cls(ch, t, duration_ps)

    def __len__(self) -> int:
        return int(self.channel.shape[0])

    def __iter__(self):
        for c, t in zip(self.channel, self.t_ps):
            yield TimeTag(int(c), int(t))

    @property
    def n_triggers(self) -> int:
        return int(np.count_nonzero(self.channel == TRIGGER_CHANNEL))

    @property
    def n_clicks(self) -> int:
        return int(np.count_nonzero(self.channel == CLICK_CHANNEL))

    def trigger_times(self) -> np.ndarray:
        return self.t_ps[self.channel == TRIGGER_CHANNEL]

    def click_times(self) -> np.ndarray:
        return self.t_ps[self.channel == CLICK_CHANNEL]


@dataclass(frozen=True)
class DetectorParams:
    """User-set detector configuration.

    ``window_offset_ps`` is the electronic delay from a trigger to the start of
    its signal detection window; it is a free calibration parameter.
    """

    holdoff_ps: int
    dark_rate_hz: float
    window_offset_ps: int = 0
    window_width_ps: int = 6000

    def __post_init__(self):
        if self.holdoff_ps <= 0:
            raise InvalidInputError("holdoff_ps must be positive")
        if self.dark_rate_hz < 0:
            raise InvalidInputError("dark_rate_hz must be nonnegative")
        if self.window_offset_ps < 0:
            raise InvalidInputError("window_offset_ps must be nonnegative")
        if self.window_width_ps <= 0:
            raise InvalidInputError("window_width_ps must be positive")
        if self.window_width_ps > self.holdoff_ps / 100:
            warnings.warn(
                "signal window is not small against the holdoff time "
                f"({self.window_width_ps} ps vs {self.holdoff_ps} ps)",
                stacklevel=2,
            )


@dataclass(frozen=True)
class PulseTrainParams:
    """Laser pulse train: repetition rate and mean photon number per pulse."""

    rep_rate_hz: float
    n_ph: float

    def __post_init__(self):
        if self.rep_rate_hz <= 0:
            raise InvalidInputError("rep_rate_hz must be positive")
        if self.n_ph < 0:
            raise InvalidInputError("n_ph must be nonnegative")


@dataclass(frozen=True)
class PhotonFluxInputs:
    """Inputs for the monitor-photocurrent route to the mean photon number.

    ``attenuation_linear`` is the linear power ratio in (0, 1]; decibel values
    are converted at the CLI boundary only.
    """

    i_mon_amp: float
    q_ratio: float
    attenuation_linear: float
    rep_rate_hz: float
    sensitivity_a_per_w: float
    wavelength_m: float

    def __post_init__(self):
        for name in ("q_ratio", "attenuation_linear", "rep_rate_hz",
                     "sensitivity_a_per_w", "wavelength_m"):
            if getattr(self, name) <= 0:
                raise InvalidInputError(f"{name} must be strictly positive")
        if self.i_mon_amp < 0:
            raise InvalidInputError("i_mon_amp must be nonnegative")
        if self.attenuation_linear > 1:
            raise InvalidInputError("attenuation_linear must be <= 1")


@dataclass(frozen=True)
class EfficiencyEstimate:
    """An intrinsic-efficiency value with its statistical uncertainty."""

    eta: float
    u_eta: float
    method: str
    n_events_used: int

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidInputError(f"eta out of range: {self.eta}")
        if self.u_eta < 0:
            raise InvalidInputError("u_eta must be nonnegative")
        if self.method not in _METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class DarkCountHistogram:
    """Per-bin dark-count probability conditional on a detection at t = 0.

    ``probs[i]`` is the probability of a dark count in the time bin
    ``[i * bin_width_ps, (i + 1) * bin_width_ps)`` after a signal detection.
    The long-time baseline is the mean of the last ``BASELINE_BINS`` bins.
    """

    probs: np.ndarray
    bin_width_ps: int = 10000
    n_conditioning_events: int = 0

    def __post_init__(self):
        p = np.ascontiguousarray(self.probs, dtype=np.float64)
        if p.ndim != 1:
            raise InvalidInputError("probs must be a 1-d array")
        if p.size and (p.min() < 0 or p.max() > 1):
            raise InvalidInputError("per-bin probabilities must lie in [0, 1]")
        if self.bin_width_ps <= 0:
            raise InvalidInputError("bin_width_ps must be positive")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n_bins(self) -> int:
        return int(self.probs.shape[0])

    @property
    def span_ps(self) -> int:
        return self.n_bins * self.bin_width_ps

    @property
    def baseline(self) -> float:
        """Mean probability over the last ``BASELINE_BINS`` bins."""
        if self.n_bins < BASELINE_BINS:
            raise DegenerateResultError(
                f"baseline needs at least {BASELINE_BINS} bins, have {self.n_bins}"
            )
        return float(self.probs[-BASELINE_BINS:].mean())


def mean_photon_number(inp: PhotonFluxInputs) -> float:
    """Mean photon number per pulse from the monitor photocurrent.

    n_ph = i_mon * q * alpha / (f * s * h * nu) with nu = c / lambda.
    """
    nu = SPEED_OF_LIGHT_M_S / inp.wavelength_m
    denom = inp.rep_rate_hz * inp.sensitivity_a_per_w * PLANCK_J_S * nu
    if denom <= 0 or not math.isfinite(denom):
        raise InvalidInputError("nonpositive or non-finite denominator")
    return inp.i_mon_amp * inp.q_ratio * inp.attenuation_linear / denom


def combined_rel_uncertainty(rel_u: Sequence[float]) -> float:
    """Quadrature combination sqrt(sum u_i^2) of relative uncertainties."""
    total = 0.0
    for u in rel_u:
        if u < 0:
            raise InvalidInputError("relative uncertainties must be nonnegative")
        total += u * u
    return math.sqrt(total)
