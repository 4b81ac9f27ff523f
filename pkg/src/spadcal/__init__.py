"""Characterization toolkit for free-running SPAD single-photon detectors.

Estimates the intrinsic detection efficiency from time-tagged trigger/click
streams via three independent routes (closed-form rate model, amended rate
model, ex-post trigger validation), analyzes dark-count dynamics, and ships a
seedable Monte-Carlo detector simulator for end-to-end validation.
"""

from ._backend import USE_NUMBA
from .core import (
    BASELINE_BINS,
    CLICK_CHANNEL,
    METHOD_AMENDED,
    METHOD_EXPOST,
    METHOD_ORIGINAL,
    TRIGGER_CHANNEL,
    DarkCountHistogram,
    DetectorParams,
    EfficiencyEstimate,
    PhotonFluxInputs,
    PulseTrainParams,
    TagStream,
    TimeTag,
    combined_rel_uncertainty,
    mean_photon_number,
)
from .errors import (
    ConfigurationError,
    DegenerateResultError,
    EmptyStreamError,
    InvalidInputError,
    NumericFailureError,
    OrderingError,
    ParseError,
    SaturationError,
    SignalBelowBackgroundError,
    SpadCalError,
)
from .models import (
    ModelInputs,
    click_prob_single_pulse,
    eta_from_click_prob,
    invert_amended,
    invert_original,
    overcycle_m,
    predict_rate_amended,
    predict_rate_original,
)
from .simulator import (
    STEP_PS,
    SimConfig,
    flat_dark_model,
    simulate_stream,
    synth_dark_model,
)
from .tag_analysis import (
    IntervalStats,
    ValidationReport,
    dark_histogram,
    eta_expost,
    mean_prev_event_interval,
    measured_rates,
    surplus_darkcount,
    validate_triggers,
)
from .tagio import (
    parse_tags,
    read_tags_bin,
    read_tags_csv,
    sniff_format,
    write_tags,
    write_tags_bin,
    write_tags_csv,
)

__version__ = "0.1.0"
