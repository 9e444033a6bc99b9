"""Channel normalization and feature scaling.

Raw channels are z-scored per channel, then the extreme tails are
truncated: every value above the channel's 97.5th percentile (of the
z-scored values) becomes +2 and every value below the 2.5th percentile
becomes -2.  Percentiles use the nearest-rank method, so thresholds are
actual data values and values equal to a threshold are left alone.

After featurization, vectors are min-max scaled to [0, 1] with a scaler
fit on the training set only; out-of-range values seen later clamp to
the interval ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingestion import Record

ZCLIP = 2.0
LOWER_PCT = 2.5
UPPER_PCT = 97.5


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel normalization statistics of one record."""

    mean: np.ndarray
    std: np.ndarray
    p_lower: np.ndarray  # 2.5th percentile of the z-scored channel
    p_upper: np.ndarray  # 97.5th percentile of the z-scored channel


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-feature min/max of the fitting set."""

    mins: np.ndarray
    maxes: np.ndarray

    def __post_init__(self):
        if self.mins.shape != self.maxes.shape or self.mins.ndim != 1:
            raise ValueError("mins and maxes must be 1-d arrays of equal length")
        if np.any(self.mins > self.maxes):
            raise ValueError("every min must be <= its max")

    @property
    def n_features(self) -> int:
        return len(self.mins)


def nearest_rank_percentile(sorted_values: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: the ceil(pct/100 * n)-th smallest value."""
    n = len(sorted_values)
    rank = int(np.ceil(pct / 100.0 * n))
    rank = min(max(rank, 1), n)
    return float(sorted_values[rank - 1])


def normalize_record(record: Record) -> tuple[Record, ChannelStats]:
    """Z-score each channel and truncate its tails to +/-2.

    A constant channel (zero standard deviation) maps to all zeros.
    Statistics are computed over this record alone.
    """
    channels = record.channels
    means = channels.mean(axis=1)
    stds = channels.std(axis=1)

    normalized = np.zeros_like(channels)
    p_lo = np.zeros(record.n_channels)
    p_hi = np.zeros(record.n_channels)
    for c in range(record.n_channels):
        if stds[c] == 0.0:
            continue
        z = (channels[c] - means[c]) / stds[c]
        z_sorted = np.sort(z)
        p_lo[c] = nearest_rank_percentile(z_sorted, LOWER_PCT)
        p_hi[c] = nearest_rank_percentile(z_sorted, UPPER_PCT)
        z[z > p_hi[c]] = ZCLIP
        z[z < p_lo[c]] = -ZCLIP
        normalized[c] = z

    out = Record(
        patient_id=record.patient_id,
        channels=normalized,
        sample_rate=record.sample_rate,
    )
    return out, ChannelStats(mean=means, std=stds, p_lower=p_lo, p_upper=p_hi)


def fit_scaler(vectors) -> MinMaxScaler:
    """Record per-feature min/max over the fitting (training) vectors."""
    m = np.asarray(vectors, dtype=float)
    if m.ndim == 1:
        m = m[np.newaxis, :]
    if m.size == 0:
        raise ValueError("cannot fit a scaler on an empty vector list")
    return MinMaxScaler(mins=m.min(axis=0), maxes=m.max(axis=0))


def apply_scaler(scaler: MinMaxScaler, vector) -> np.ndarray:
    """Map a vector componentwise onto [0, 1].

    Components scale as (x - min) / (max - min), clamped to [0, 1];
    a degenerate feature with max == min maps to 0.5.
    """
    v = np.asarray(vector, dtype=float)
    if v.shape != scaler.mins.shape:
        raise ValueError(
            f"vector has {v.shape[0] if v.ndim == 1 else v.shape} features, "
            f"scaler expects {scaler.n_features}"
        )
    span = scaler.maxes - scaler.mins
    degenerate = span == 0
    safe_span = np.where(degenerate, 1.0, span)
    scaled = (v - scaler.mins) / safe_span
    scaled = np.clip(scaled, 0.0, 1.0)
    return np.where(degenerate, 0.5, scaled)
