"""Per-channel waveform features for 1-second EEG windows.

Nine scalar features are computed from each channel of a window and
concatenated channel-major into the classifier input vector.  Several
features depend on the peaks and valleys of the waveform, where a peak is
a sample at which the first difference changes sign from positive to
negative and a valley is the opposite turn.  Samples at the window
boundary are never peaks or valleys (there is no two-sided derivative
there), and flat plateaus inherit the sign of the last nonzero
difference, with the turn recorded at the first sample of the plateau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Order of the per-channel features inside a feature vector.
FEATURE_NAMES = (
    "area",
    "normalized_decay",
    "line_length",
    "mean_energy",
    "avg_peak_amplitude",
    "avg_valley_amplitude",
    "normalized_peak_number",
    "peak_variation",
    "rms",
)

N_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class PeaksValleys:
    """Alternating peak/valley turn points of one window.

    Indices are strictly increasing, lie in [1, W-2], and peaks and
    valleys strictly alternate, so the counts differ by at most one.
    """

    peak_indices: np.ndarray
    peak_values: np.ndarray
    valley_indices: np.ndarray
    valley_values: np.ndarray

    @property
    def n_peaks(self) -> int:
        return len(self.peak_indices)

    @property
    def n_valleys(self) -> int:
        return len(self.valley_indices)


@dataclass(frozen=True)
class ChannelFeatures:
    """The nine scalar features of a single channel window.

    Sentinel rules keep every field finite: the log-amplitude features
    are 0 when there is no peak (valley) to average, the normalized peak
    number is 0 on a constant window, and the peak variation is 0 when
    fewer than two peak/valley pairs exist or either spread is zero.
    """

    area: float
    normalized_decay: float
    line_length: float
    mean_energy: float
    avg_peak_amplitude: float
    avg_valley_amplitude: float
    normalized_peak_number: float
    peak_variation: float
    rms: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES])


def detect_peaks_valleys(window) -> PeaksValleys:
    """Find the alternating peaks and valleys of a window.

    Zero first-differences inherit the sign of the most recent nonzero
    difference; a +/- sign change records a peak at the first index of
    the plateau (or at the turning sample itself), -/+ records a valley.
    A monotone or constant window has no peaks and no valleys, and any
    flat or sloped run before the first sign is established produces
    nothing.
    """
    x = np.asarray(window, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("window must be a 1-d sequence of at least 2 samples")

    d = np.diff(x)
    s = np.sign(d).astype(int)
    nonzero = s != 0

    # last_nz[i]: index of the last nonzero diff at or before i (-1 if none)
    last_nz = np.maximum.accumulate(np.where(nonzero, np.arange(len(s)), -1))
    effective = np.where(last_nz >= 0, s[np.maximum(last_nz, 0)], 0)

    peak_idx = []
    valley_idx = []
    for i in np.flatnonzero(nonzero):
        if i == 0 or effective[i - 1] == 0 or s[i] == effective[i - 1]:
            continue
        # turn at the first sample of the plateau preceding diff i
        turn = last_nz[i - 1] + 1
        if s[i] < 0:
            peak_idx.append(turn)
        else:
            valley_idx.append(turn)

    peak_idx = np.array(peak_idx, dtype=int)
    valley_idx = np.array(valley_idx, dtype=int)
    return PeaksValleys(
        peak_indices=peak_idx,
        peak_values=x[peak_idx],
        valley_indices=valley_idx,
        valley_values=x[valley_idx],
    )


def channel_features(window) -> ChannelFeatures:
    """Compute the nine features of one channel window (length >= 2)."""
    x = np.asarray(window, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("window must be a 1-d sequence of at least 2 samples")
    w = len(x)
    d = np.diff(x)

    area = float(np.mean(x))
    # fraction of strictly decreasing steps, chance-corrected
    decay = float(abs(np.mean(d < 0) - 0.5))
    line_length = float(np.sum(np.abs(d)))
    mean_energy = float(np.mean(np.abs(x * x)))
    rms = float(np.sqrt(np.mean(x * x)))

    pv = detect_peaks_valleys(x)
    k, v = pv.n_peaks, pv.n_valleys

    # the log-amplitude sentinels also cover an all-zero mean square,
    # which would otherwise produce -inf
    peak_sq = float(np.mean(pv.peak_values**2)) if k > 0 else 0.0
    peak_amp = float(np.log10(peak_sq)) if peak_sq > 0 else 0.0
    valley_sq = float(np.mean(pv.valley_values**2)) if v > 0 else 0.0
    valley_amp = float(np.log10(valley_sq)) if valley_sq > 0 else 0.0

    mean_abs_diff = float(np.mean(np.abs(d)))
    norm_peaks = k / mean_abs_diff if mean_abs_diff > 0 else 0.0

    peak_variation = _peak_variation(pv)

    return ChannelFeatures(
        area=area,
        normalized_decay=decay,
        line_length=line_length,
        mean_energy=mean_energy,
        avg_peak_amplitude=peak_amp,
        avg_valley_amplitude=valley_amp,
        normalized_peak_number=norm_peaks,
        peak_variation=peak_variation,
        rms=rms,
    )


def _peak_variation(pv: PeaksValleys) -> float:
    """Inverse product of the index-gap and value-gap spreads.

    The i-th peak is paired with the i-th valley; only the first
    min(K, V) pairs enter, and the spreads use the sample standard
    deviation (count - 1 denominator) over those pairs.
    """
    n = min(pv.n_peaks, pv.n_valleys)
    if n < 2:
        return 0.0
    idx_gap = pv.peak_indices[:n] - pv.valley_indices[:n]
    val_gap = pv.peak_values[:n] - pv.valley_values[:n]
    sigma_idx = float(np.std(idx_gap, ddof=1))
    sigma_val = float(np.std(val_gap, ddof=1))
    product = sigma_idx * sigma_val
    if product == 0.0:
        return 0.0
    return 1.0 / product


def window_features(samples) -> np.ndarray:
    """Featurize a C x W window into a length C*9 channel-major vector."""
    m = np.asarray(samples, dtype=float)
    if m.ndim != 2:
        raise ValueError("samples must be a C x W matrix")
    return np.concatenate([channel_features(row).as_array() for row in m])
