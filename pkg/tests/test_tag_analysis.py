import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spadcal import (
    DarkCountHistogram,
    DetectorParams,
    EmptyStreamError,
    InvalidInputError,
    PulseTrainParams,
    TagStream,
    dark_histogram,
    eta_expost,
    mean_prev_event_interval,
    measured_rates,
    surplus_darkcount,
    validate_triggers,
)
from spadcal.errors import ConfigurationError, DegenerateResultError
from spadcal.tag_analysis import _NEG

from conftest import stream_from_pairs

US = 1_000_000

DET = DetectorParams(holdoff_ps=10 * US, dark_rate_hz=0.0)


class TestValidateTriggers:
    def test_hand_traced_example(self):
        # triggers at 0, 5, 12, 25 us; one click at 3 ns
        s = stream_from_pairs([(0, 0), (1, 3000), (0, 5 * US), (0, 12 * US), (0, 25 * US)])
        rep = validate_triggers(s, DET)
        assert rep.n_trigger == 4
        assert rep.n_trigger_inv == 1  # the 5 us trigger is shadowed
        assert rep.n_signal == 1
        assert rep.p_click_true == pytest.approx(1 / 3)

    def test_triggers_only(self):
        s = stream_from_pairs([(0, i * 20 * US) for i in range(5)])
        rep = validate_triggers(s, DET)
        assert rep.n_trigger_inv == 0
        assert rep.p_click_true == 0.0

    def test_boundary_interval_is_valid(self):
        s = stream_from_pairs([(0, 0), (1, 1000), (0, 1000 + 10 * US)])
        rep = validate_triggers(s, DET)
        assert rep.n_trigger_inv == 0

    def test_just_inside_holdoff_is_invalid(self):
        s = stream_from_pairs([(0, 0), (1, 1000), (0, 999 + 10 * US)])
        rep = validate_triggers(s, DET)
        assert rep.n_trigger_inv == 1

    def test_dark_clicks_shadow_triggers(self):
        # a click with no preceding trigger window still shadows
        s = stream_from_pairs([(1, 50_000), (0, 5 * US), (0, 12 * US)])
        rep = validate_triggers(s, DET)
        assert rep.n_trigger_inv == 1

    def test_one_signal_count_per_trigger(self):
        s = stream_from_pairs([(0, 0), (1, 1000), (1, 2000), (0, 20 * US)])
        rep = validate_triggers(s, DET)
        assert rep.n_signal == 1

    def test_window_offset_respected(self):
        det = DetectorParams(holdoff_ps=10 * US, dark_rate_hz=0.0,
                             window_offset_ps=5000, window_width_ps=6000)
        inside = stream_from_pairs([(0, 0), (1, 7000)])
        outside = stream_from_pairs([(0, 0), (1, 3000)])
        assert validate_triggers(inside, det).n_signal == 1
        assert validate_triggers(outside, det).n_signal == 0

    def test_empty_stream(self):
        with pytest.raises(EmptyStreamError):
            validate_triggers(stream_from_pairs([]), DET)

    def test_all_triggers_shadowed(self):
        s = stream_from_pairs([(1, 0), (0, 5 * US)])
        with pytest.raises(DegenerateResultError):
            validate_triggers(s, DET)

    def test_collect_indices(self):
        s = stream_from_pairs([(0, 0), (1, 3000), (0, 5 * US), (0, 12 * US)])
        rep = validate_triggers(s, DET, collect_indices=True)
        assert rep.valid_trigger_indices.tolist() == [0, 3]

    def test_chunked_scan_matches_single_pass(self):
        # validation is a left fold; carrying the last-click state across a
        # split must reproduce the one-pass result
        rng = np.random.default_rng(3)
        t, tags = 0, []
        for _ in range(400):
            t += int(rng.integers(1 * US, 30 * US))
            tags.append((0, t))
            if rng.random() < 0.4:
                tags.append((1, t + 3000))
        full = stream_from_pairs(tags)
        whole = validate_triggers(full, DET)

        half = len(tags) // 2
        while tags[half][0] != 0:  # split between trigger groups, not mid-window
            half += 1
        first = stream_from_pairs(tags[:half])
        second = stream_from_pairs(tags[half:])
        rep1 = validate_triggers(first, DET)
        last_click = first.click_times()
        carry = int(last_click[-1]) if last_click.size else _NEG
        rep2 = validate_triggers(second, DET, _t_last_click_init=carry)
        assert rep1.n_trigger + rep2.n_trigger == whole.n_trigger
        assert rep1.n_trigger_inv + rep2.n_trigger_inv == whole.n_trigger_inv
        assert rep1.n_signal + rep2.n_signal == whole.n_signal


class TestMeasuredRates:
    def test_click_rate(self):
        pairs = [(1, (i + 1) * 10**10) for i in range(100)]
        s = stream_from_pairs(pairs, duration_ps=10**12)
        n_click, _ = measured_rates(s, DET, PulseTrainParams(50_000, 1.0))
        assert n_click == pytest.approx(100.0)

    def test_dedicated_dark_stream(self):
        main = stream_from_pairs([(0, 0), (1, 3000)], duration_ps=10**12)
        dark = stream_from_pairs([(1, i * 10**9) for i in range(1, 871)], duration_ps=10**12)
        _, n_dark = measured_rates(main, DET, PulseTrainParams(50_000, 1.0), dark)
        assert n_dark == pytest.approx(870.0)

    def test_zero_duration_rejected(self):
        s = stream_from_pairs([], duration_ps=0)
        with pytest.raises(InvalidInputError):
            measured_rates(s, DET, PulseTrainParams(50_000, 1.0))


class TestDarkHistogram:
    SPAN = 500 * US

    def test_single_delayed_dark_click(self):
        # one dark click exactly 37 us after every signal click
        tags = []
        for i in range(50):
            t0 = i * 500 * US
            tags.append((0, t0))
            tags.append((1, t0 + 1000))
            tags.append((1, t0 + 1000 + 37 * US))
        s = stream_from_pairs(tags)
        hist = dark_histogram(s, DET, PulseTrainParams(2000, 20.0), self.SPAN)
        assert hist.n_conditioning_events == 50
        nonzero = np.flatnonzero(hist.probs)
        assert nonzero.tolist() == [3700]
        assert hist.probs[3700] == pytest.approx(1.0)

    def test_no_dark_clicks(self):
        tags = []
        for i in range(10):
            t0 = i * 500 * US
            tags.extend([(0, t0), (1, t0 + 1000)])
        s = stream_from_pairs(tags)
        hist = dark_histogram(s, DET, PulseTrainParams(2000, 20.0), self.SPAN)
        assert not np.any(hist.probs)
        assert hist.baseline == 0.0

    def test_span_must_fit_repetition_interval(self):
        s = stream_from_pairs([(0, 0), (1, 1000)])
        with pytest.raises(ConfigurationError):
            dark_histogram(s, DET, PulseTrainParams(50_000, 1.0), self.SPAN)

    def test_span_must_cover_baseline_bins(self):
        s = stream_from_pairs([(0, 0), (1, 1000)])
        with pytest.raises(ConfigurationError):
            dark_histogram(s, DET, PulseTrainParams(2000, 1.0), 10 * US)

    def test_no_successful_triggers(self):
        s = stream_from_pairs([(0, 0), (0, 500 * US)])
        with pytest.raises(DegenerateResultError):
            dark_histogram(s, DET, PulseTrainParams(2000, 1.0), self.SPAN)

    def test_translation_invariant(self):
        tags = [(0, 0), (1, 2000), (1, 90 * US), (0, 500 * US), (1, 500 * US + 2000)]
        shift = 123 * US
        a = dark_histogram(stream_from_pairs(tags), DET,
                           PulseTrainParams(2000, 1.0), self.SPAN)
        b = dark_histogram(stream_from_pairs([(c, t + shift) for c, t in tags]), DET,
                           PulseTrainParams(2000, 1.0), self.SPAN)
        assert np.array_equal(a.probs, b.probs)


class TestSurplusDarkcount:
    def test_flat_histogram_cancels(self):
        hist = DarkCountHistogram(probs=np.full(6000, 3e-6))
        surplus = surplus_darkcount(hist)
        assert np.max(np.abs(surplus)) < 1e-12

    def test_bump_then_plateau(self):
        probs = np.full(55_000, 8.7e-6)
        probs[1000:2000] += 5e-6  # total excess 0.005 just after holdoff
        hist = DarkCountHistogram(probs=probs)
        surplus = surplus_darkcount(hist)
        assert surplus[-1] == pytest.approx(0.005, rel=1e-6)
        assert np.max(surplus) == pytest.approx(0.005, rel=1e-6)

    def test_suppression_decreases_after_maximum(self):
        probs = np.full(55_000, 8.7e-6)
        probs[1000:2000] += 5e-6
        probs[2000:30_000] -= 2e-6  # count suppression below baseline
        hist = DarkCountHistogram(probs=probs)
        surplus = surplus_darkcount(hist)
        peak = int(np.argmax(surplus))
        assert surplus[peak + 5000] < surplus[peak]

    @given(st.lists(st.floats(min_value=0, max_value=1e-3), min_size=1, max_size=40))
    def test_telescoping_identity(self, values):
        probs = np.resize(np.array(values), 5040)
        hist = DarkCountHistogram(probs=probs)
        surplus = surplus_darkcount(hist)
        expected = math.fsum(probs) - probs.size * hist.baseline
        assert surplus[-1] == pytest.approx(expected, abs=1e-12)


class TestMeanPrevEventInterval:
    def test_strictly_periodic_clicks(self):
        tags = []
        for i in range(20):
            t0 = i * 100 * US
            tags.extend([(0, t0), (1, t0 + 1000)])
        s = stream_from_pairs(tags)
        stats = mean_prev_event_interval(s, DET)
        assert stats.mean_prev_interval_ps == pytest.approx(100 * US)
        assert stats.rel_std_of_mean == 0.0
        assert stats.n_signal_events == 19

    def test_needs_two_clicks(self):
        with pytest.raises(DegenerateResultError):
            mean_prev_event_interval(stream_from_pairs([(0, 0), (1, 1000)]), DET)

    def test_dark_click_counts_as_previous_event(self):
        tags = [(0, 0), (1, 1000), (1, 40 * US), (0, 100 * US), (1, 100 * US + 1000)]
        stats = mean_prev_event_interval(stream_from_pairs(tags), DET)
        # only the second signal click has a predecessor: the dark at 40 us
        assert stats.n_signal_events == 1
        assert stats.mean_prev_interval_ps == pytest.approx(60 * US + 1000)


class TestEtaExpost:
    def test_no_clicks_gives_zero(self):
        s = stream_from_pairs([(0, i * 20 * US) for i in range(10)])
        est = eta_expost(s, DET, 1.0)
        assert est.eta == 0.0
        assert est.method == "expost"

    def test_every_trigger_clicked_saturates(self):
        tags = []
        for i in range(5):
            t0 = i * 20 * US
            tags.extend([(0, t0), (1, t0 + 1000)])
        with pytest.raises(InvalidInputError):
            eta_expost(stream_from_pairs(tags), DET, 1.0)

    def test_partial_click_fraction(self):
        # 2 of 4 valid triggers clicked -> p = 1/2
        tags = [(0, 0), (1, 1000),
                (0, 20 * US),
                (0, 40 * US), (1, 40 * US + 1000),
                (0, 60 * US)]
        est = eta_expost(stream_from_pairs(tags), DET, 2.0)
        assert est.eta == pytest.approx(-math.log(0.5) / 2.0, rel=1e-12)
        assert est.n_events_used == 4
