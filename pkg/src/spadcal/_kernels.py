"""Hot inner loops over tag arrays, JIT-compiled via numba when available.

Every kernel is a plain scalar loop over numpy arrays so the same source runs
under ``numba.njit`` and under the interpreter (see :mod:`spadcal._backend`).
Randomness uses the legacy MT19937 generator through ``np.random``; numba
implements the identical algorithm, so a given seed yields the same stream on
both backends.
"""

import math

import numpy as np

from ._backend import jit_compile

_NEG = -(1 << 60)
_NEVER = 1 << 62


def _validate_scan(channel, t_ps, holdoff_ps, offset_ps, width_ps,
                   t_last_click, valid_idx, collect):
    """Chronological trigger-validation scan.

    A trigger is invalid iff it lies strictly within the holdoff of the most
    recent click (the boundary interval == holdoff is valid).  A click is
    counted as signal iff it falls inside the window of the latest valid
    trigger that has not been credited yet.  Returns the counts plus the final
    last-click time so the scan can be chunked as a left fold.
    """
    n_trigger = 0
    n_invalid = 0
    n_signal = 0
    n_valid = 0
    win_start = _NEG
    win_end = _NEG
    credited = True
    for i in range(channel.shape[0]):
        ti = t_ps[i]
        if channel[i] == 0:
            n_trigger += 1
            if ti - t_last_click < holdoff_ps:
                n_invalid += 1
            else:
                win_start = ti + offset_ps
                win_end = win_start + width_ps
                credited = False
                if collect:
                    valid_idx[n_valid] = i
                n_valid += 1
        else:
            if (not credited) and ti >= win_start and ti < win_end:
                n_signal += 1
                credited = True
            t_last_click = ti
    return n_trigger, n_invalid, n_signal, n_valid, t_last_click


def _prev_interval_scan(channel, t_ps, offset_ps, width_ps, intervals):
    """Collect (signal click - previous click) intervals, one per trigger."""
    prev_click = _NEG
    win_start = _NEG
    win_end = _NEG
    credited = True
    m = 0
    for i in range(channel.shape[0]):
        ti = t_ps[i]
        if channel[i] == 0:
            win_start = ti + offset_ps
            win_end = win_start + width_ps
            credited = False
        else:
            if (not credited) and ti >= win_start and ti < win_end:
                credited = True
                if prev_click > _NEG:
                    intervals[m] = ti - prev_click
                    m += 1
            prev_click = ti
    return m


def _dark_hist_scan(channel, t_ps, offset_ps, width_ps, span_ps, bin_width_ps,
                    counts):
    """Histogram clicks following each in-window signal click.

    For every trigger whose window contains a click, all later clicks with
    offset tau in [0, span) from that signal click are binned.  Returns the
    number of conditioning (successful-trigger) events.
    """
    n = channel.shape[0]
    win_start = _NEG
    win_end = _NEG
    credited = True
    n_success = 0
    for i in range(n):
        ti = t_ps[i]
        if channel[i] == 0:
            win_start = ti + offset_ps
            win_end = win_start + width_ps
            credited = False
        else:
            if (not credited) and ti >= win_start and ti < win_end:
                credited = True
                n_success += 1
                j = i + 1
                while j < n and t_ps[j] - ti < span_ps:
                    if channel[j] == 1:
                        counts[(t_ps[j] - ti) // bin_width_ps] += 1
                    j += 1
    return n_success


def _sample_dark_step(t_last, holdoff_steps, neg_log_surv, log1m_base, n_bins):
    """Draw the absolute step of the next dark count after a detection.

    ``neg_log_surv[j]`` is -sum(log1p(-p_i), i <= j) over the histogram bins;
    beyond the span the per-step probability is the constant baseline encoded
    as ``log1m_base`` = log1p(-baseline).  Inverse-CDF sampling: one uniform
    draw locates the first-success bin via binary search, with a geometric
    tail.  Returns a sentinel far beyond any stream when no dark can occur.
    """
    u = np.random.random()
    if u <= 0.0:
        u = 1e-300
    k0 = holdoff_steps
    if -t_last > k0:
        k0 = -t_last  # no detection yet: hazard sits in the baseline tail
    if k0 < n_bins:
        prev = neg_log_surv[k0 - 1] if k0 > 0 else 0.0
        target = prev - math.log(u)
        j = np.searchsorted(neg_log_surv, target, side="right")
        if j < n_bins:
            if j < k0:
                j = k0
            return t_last + j
        if log1m_base >= 0.0:
            return _NEVER
        log_r = math.log(u) + (neg_log_surv[n_bins - 1] - prev)
        if log_r > 0.0:
            log_r = 0.0
        return t_last + n_bins + int(log_r / log1m_base)
    if log1m_base >= 0.0:
        return _NEVER
    return t_last + k0 + int(math.log(u) / log1m_base)


def _simulate_events(n_steps, rep_rate_hz, n_epochs, holdoff_steps, n_ph,
                     eta_const, use_profile, prof_interval_ps, prof_eta,
                     neg_log_surv, log1m_base, seed, channel_out, t_out):
    """Event-driven detector simulation on a 10 ns step grid.

    Statistically equivalent to drawing one Bernoulli per step: the next dark
    count is pre-sampled from the conditional hazard (histogram then baseline
    tail) and signal draws happen per pulse epoch while the detector is armed.
    Pulse epochs land on the first step at or after k / f.  Emits triggers and
    clicks chronologically (trigger first at equal step) and returns the tag
    count.
    """
    np.random.seed(seed)
    n_bins = neg_log_surv.shape[0]
    t_last = _NEG
    n = 0
    t_dark = _sample_dark_step(t_last, holdoff_steps, neg_log_surv,
                               log1m_base, n_bins)
    for k in range(n_epochs):
        s = int(math.ceil(k * 1.0e8 / rep_rate_hz))
        if s >= n_steps:
            break
        while t_dark < s:
            channel_out[n] = 1
            t_out[n] = t_dark
            n += 1
            t_last = t_dark
            t_dark = _sample_dark_step(t_last, holdoff_steps, neg_log_surv,
                                       log1m_base, n_bins)
        channel_out[n] = 0
        t_out[n] = s
        n += 1
        if s - t_last >= holdoff_steps:
            if use_profile:
                eta = _interp_clamped((s - t_last) * 10000.0,
                                      prof_interval_ps, prof_eta)
            else:
                eta = eta_const
            p0 = -math.expm1(-n_ph * eta)
            fired = np.random.random() < p0
            if fired or t_dark == s:
                channel_out[n] = 1
                t_out[n] = s
                n += 1
                t_last = s
                t_dark = _sample_dark_step(t_last, holdoff_steps, neg_log_surv,
                                           log1m_base, n_bins)
    while t_dark < n_steps:
        channel_out[n] = 1
        t_out[n] = t_dark
        n += 1
        t_last = t_dark
        t_dark = _sample_dark_step(t_last, holdoff_steps, neg_log_surv,
                                   log1m_base, n_bins)
    return n


def _interp_clamped(x, xs, ys):
    """Piecewise-linear interpolation, clamped to the end values."""
    n = xs.shape[0]
    if x <= xs[0]:
        return ys[0]
    if x >= xs[n - 1]:
        return ys[n - 1]
    i = np.searchsorted(xs, x, side="right") - 1
    w = (x - xs[i]) / (xs[i + 1] - xs[i])
    return ys[i] + w * (ys[i + 1] - ys[i])


_interp_clamped = jit_compile(_interp_clamped)
_sample_dark_step = jit_compile(_sample_dark_step)
validate_scan = jit_compile(_validate_scan)
prev_interval_scan = jit_compile(_prev_interval_scan)
dark_hist_scan = jit_compile(_dark_hist_scan)
simulate_events = jit_compile(_simulate_events)
