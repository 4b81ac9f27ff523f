"""Command-line front end.

All analysis results are emitted as one machine-readable JSON object per line
on stdout; the histogram subcommand emits CSV.  Exit codes: 0 success, 2 usage
error, 3 data error, 4 model saturation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import tagio
from .core import (
    DetectorParams,
    PhotonFluxInputs,
    PulseTrainParams,
    TagStream,
    mean_photon_number,
)
from .errors import (
    ConfigurationError,
    DegenerateResultError,
    EmptyStreamError,
    InvalidInputError,
    ParseError,
    SaturationError,
    SignalBelowBackgroundError,
    SpadCalError,
)
from .models import ModelInputs, invert_amended, invert_original
from .simulator import (
    STEP_PS,
    SimConfig,
    simulate_stream,
    synth_dark_model,
)
from .core import DarkCountHistogram
from .tag_analysis import (
    dark_histogram,
    eta_expost,
    mean_prev_event_interval,
    measured_rates,
    surplus_darkcount,
    validate_triggers,
)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_SATURATION = 4


@dataclass(frozen=True)
class ResultRecord:
    """One flat record per efficiency analysis; serializes to a JSON line."""

    method: str
    eta: float
    u_eta: float
    n_ph: float
    rep_rate_hz: float
    holdoff_ps: int
    n_click_hz: float
    n_dark_hz: float
    run_id: str
    mean_prev_interval_ps: Optional[float] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ResultRecord":
        return cls(**json.loads(line))


def db_to_linear(att_db: float) -> float:
    """Attenuation in dB to a linear power ratio."""
    return 10.0 ** (-att_db / 10.0)


def _detector(args, dark_rate_hz: float = 0.0) -> DetectorParams:
    return DetectorParams(
        holdoff_ps=int(round(args.holdoff_us * 1e6)),
        dark_rate_hz=dark_rate_hz,
        window_offset_ps=int(round(args.window_offset_ns * 1e3)),
        window_width_ps=int(round(args.window_ns * 1e3)),
    )


def _load_profile(path: str):
    knots = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{path}: line {lineno}: expected interval_ps,eta")
        try:
            knots.append((float(parts[0]), float(parts[1])))
        except ValueError:
            if lineno == 1:
                continue  # header
            raise ParseError(f"{path}: line {lineno}: malformed profile knot") from None
    if not knots:
        raise ParseError(f"{path}: no profile knots found")
    return knots


def _load_dark_hist(path: str) -> DarkCountHistogram:
    taus, probs = [], []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        try:
            taus.append(float(parts[0]))
            probs.append(float(parts[1]))
        except (ValueError, IndexError):
            if lineno == 1:
                continue  # header
            raise ParseError(f"{path}: line {lineno}: malformed histogram row") from None
    taus_arr = np.asarray(taus)
    widths = np.diff(taus_arr)
    if widths.size == 0 or np.any(widths != widths[0]):
        raise ParseError(f"{path}: histogram bins must be uniform")
    return DarkCountHistogram(probs=np.asarray(probs), bin_width_ps=int(widths[0]))


def _cmd_simulate(args) -> int:
    det = _detector(args, dark_rate_hz=args.dark_baseline)
    if args.dark_hist:
        dark = _load_dark_hist(args.dark_hist)
    else:
        span_ps = det.holdoff_ps + int(round(args.dark_span_us * 1e6))
        dark = synth_dark_model(
            baseline_rate_hz=args.dark_baseline,
            afterpulse_amp=args.ap_amp,
            afterpulse_tau_ps=int(round(args.ap_tau_us * 1e6)),
            holdoff_ps=det.holdoff_ps,
            span_ps=span_ps,
        )
    cfg = SimConfig(
        detector=det,
        pulses=PulseTrainParams(rep_rate_hz=args.rep_rate, n_ph=args.nph),
        dark_model=dark,
        duration_s=args.duration_s,
        seed=args.seed,
        eta=args.eta,
        eta_profile=_load_profile(args.eta_profile) if args.eta_profile else None,
    )
    stream = simulate_stream(cfg)
    tagio.write_tags(stream, args.out, args.format)
    print(json.dumps({
        "out": args.out,
        "format": args.format,
        "n_tags": len(stream),
        "n_triggers": stream.n_triggers,
        "n_clicks": stream.n_clicks,
        "duration_ps": stream.duration_ps,
        "seed": args.seed,
    }, sort_keys=True))
    return 0


def _cmd_validate(args) -> int:
    stream = tagio.parse_tags(args.tags, tagio.sniff_format(args.tags))
    det = _detector(args)
    report = validate_triggers(stream, det)
    print(json.dumps({
        "n_trigger": report.n_trigger,
        "n_trigger_inv": report.n_trigger_inv,
        "n_signal": report.n_signal,
        "p_click_true": report.p_click_true,
    }, sort_keys=True))
    return 0


def _cmd_fit(args) -> int:
    stream = tagio.parse_tags(args.tags, tagio.sniff_format(args.tags))
    pulses = PulseTrainParams(rep_rate_hz=args.rep_rate, n_ph=args.nph)
    det = _detector(args)
    dark_stream = None
    if args.dark_tags:
        dark_stream = tagio.parse_tags(args.dark_tags, tagio.sniff_format(args.dark_tags))
    n_click_hz, n_dark_hz = measured_rates(stream, det, pulses, dark_stream)
    if args.dark_rate is not None:
        n_dark_hz = args.dark_rate
    if args.model == "expost":
        # the validation route suppresses dark influence by construction
        est = eta_expost(stream, det, args.nph)
    else:
        det = _detector(args, dark_rate_hz=n_dark_hz)
        inputs = ModelInputs(
            detector=det,
            pulses=pulses,
            n_click_hz=n_click_hz,
            duration_s=stream.duration_ps * 1e-12,
        )
        est = invert_original(inputs) if args.model == "original" else invert_amended(inputs)
    mean_prev: Optional[float] = None
    try:
        mean_prev = mean_prev_event_interval(stream, det).mean_prev_interval_ps
    except DegenerateResultError:
        pass
    record = ResultRecord(
        method=est.method,
        eta=est.eta,
        u_eta=est.u_eta,
        n_ph=args.nph,
        rep_rate_hz=args.rep_rate,
        holdoff_ps=det.holdoff_ps,
        n_click_hz=n_click_hz,
        n_dark_hz=n_dark_hz,
        run_id=args.run_id or Path(args.tags).stem,
        mean_prev_interval_ps=mean_prev,
    )
    print(record.to_json())
    return 0


def _cmd_histogram(args) -> int:
    stream = tagio.parse_tags(args.tags, tagio.sniff_format(args.tags))
    det = _detector(args)
    hist = dark_histogram(
        stream,
        det,
        pulses=None,
        span_ps=int(round(args.span_us * 1e6)),
        bin_width_ps=int(round(args.bin_ns * 1e3)),
    )
    surplus = surplus_darkcount(hist) if args.surplus else None
    header = "tau_ps,prob,surplus" if args.surplus else "tau_ps,prob"
    print(header)
    for i, p in enumerate(hist.probs):
        tau = i * hist.bin_width_ps
        if surplus is not None:
            print(f"{tau},{p:.10g},{surplus[i]:.10g}")
        else:
            print(f"{tau},{p:.10g}")
    return 0


def _cmd_intervals(args) -> int:
    stream = tagio.parse_tags(args.tags, tagio.sniff_format(args.tags))
    det = _detector(args)
    stats = mean_prev_event_interval(stream, det)
    print(json.dumps({
        "mean_prev_interval_ps": stats.mean_prev_interval_ps,
        "rel_std_of_mean": stats.rel_std_of_mean,
        "n_signal_events": stats.n_signal_events,
    }, sort_keys=True))
    return 0


def _cmd_nph(args) -> int:
    n_ph = mean_photon_number(PhotonFluxInputs(
        i_mon_amp=args.imon_a,
        q_ratio=args.q,
        attenuation_linear=db_to_linear(args.att_db),
        rep_rate_hz=args.rep_rate,
        sensitivity_a_per_w=args.sensitivity,
        wavelength_m=args.wavelength_nm * 1e-9,
    ))
    print(json.dumps({"n_ph": n_ph}, sort_keys=True))
    return 0


def _add_window_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-ns", type=float, default=6.0,
                   help="signal window width in ns (default 6)")
    p.add_argument("--window-offset-ns", type=float, default=0.0,
                   help="trigger-to-window delay in ns (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spadcal",
        description="Characterize SPAD single-photon detectors from time-tagged streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a Monte-Carlo tag stream")
    p.add_argument("--rep-rate", type=float, required=True, help="pulse repetition rate in Hz")
    p.add_argument("--nph", type=float, required=True, help="mean photons per pulse")
    p.add_argument("--eta", type=float, default=None, help="constant intrinsic efficiency")
    p.add_argument("--eta-profile", default=None,
                   help="CSV file of interval_ps,eta knots (rate-dependent efficiency)")
    p.add_argument("--holdoff-us", type=float, required=True)
    p.add_argument("--duration-s", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dark-hist", default=None, help="CSV dark histogram tau_ps,prob")
    p.add_argument("--dark-baseline", type=float, default=0.0, help="dark rate in Hz")
    p.add_argument("--ap-amp", type=float, default=0.0, help="afterpulse excess per bin")
    p.add_argument("--ap-tau-us", type=float, default=10.0, help="afterpulse decay time")
    p.add_argument("--dark-span-us", type=float, default=500.0,
                   help="synthetic histogram span beyond the holdoff")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    _add_window_opts(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("validate", help="ex-post trigger validation report")
    p.add_argument("--tags", required=True)
    p.add_argument("--holdoff-us", type=float, required=True)
    _add_window_opts(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("fit", help="estimate the intrinsic detection efficiency")
    p.add_argument("--tags", required=True)
    p.add_argument("--model", choices=("original", "amended", "expost"), required=True)
    p.add_argument("--nph", type=float, required=True)
    p.add_argument("--rep-rate", type=float, required=True)
    p.add_argument("--holdoff-us", type=float, required=True)
    p.add_argument("--dark-rate", type=float, default=None,
                   help="dark rate in Hz (ignored for --model expost)")
    p.add_argument("--dark-tags", default=None, help="dedicated dark (untriggered) stream")
    p.add_argument("--run-id", default=None)
    _add_window_opts(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("histogram", help="conditional dark-count histogram")
    p.add_argument("--tags", required=True)
    p.add_argument("--holdoff-us", type=float, required=True)
    p.add_argument("--span-us", type=float, default=500.0)
    p.add_argument("--bin-ns", type=float, default=10.0)
    p.add_argument("--surplus", action="store_true",
                   help="append the integrated surplus-darkcount column")
    _add_window_opts(p)
    p.set_defaults(func=_cmd_histogram)

    p = sub.add_parser("intervals", help="mean time to the previous event")
    p.add_argument("--tags", required=True)
    p.add_argument("--holdoff-us", type=float, default=10.0)
    _add_window_opts(p)
    p.set_defaults(func=_cmd_intervals)

    p = sub.add_parser("nph", help="mean photon number from the monitor photocurrent")
    p.add_argument("--imon-a", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--att-db", type=float, required=True)
    p.add_argument("--rep-rate", type=float, required=True)
    p.add_argument("--sensitivity", type=float, required=True)
    p.add_argument("--wavelength-nm", type=float, required=True)
    p.set_defaults(func=_cmd_nph)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SaturationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SATURATION
    except (ParseError, EmptyStreamError, DegenerateResultError, InvalidInputError,
            ConfigurationError, SignalBelowBackgroundError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SpadCalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
