"""Synthetic multichannel EEG with planted seizure episodes.

Each patient gets its own trait draw (episode oscillation frequency,
background level, per-channel gains), so a cohort shows the kind of
inter-patient variation that makes cross-patient generalization harder
than within-patient fitting.  Background activity is band-limited
noise; episodes are high-amplitude 3 to 5 Hz oscillations on whole-
second boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingestion import Record, SeizureAnnotations

DEFAULT_SAMPLE_RATE = 256
DEFAULT_CHANNELS = 23
DEFAULT_DURATION = 600
DEFAULT_SEIZURE_FRACTION = 0.10

_BAND_LOW_HZ = 0.5
_BAND_HIGH_HZ = 30.0


@dataclass(frozen=True)
class PatientTraits:
    """Per-patient generation parameters drawn once from the seed."""

    seizure_freq: float
    background_scale: float
    seizure_multiplier: float
    channel_gains: np.ndarray
    channel_phases: np.ndarray


def _draw_traits(rng, n_channels: int) -> PatientTraits:
    return PatientTraits(
        seizure_freq=float(rng.uniform(3.0, 5.0)),
        background_scale=float(rng.uniform(8.0, 12.0)),
        seizure_multiplier=float(rng.uniform(4.0, 6.0)),
        channel_gains=rng.uniform(0.8, 1.2, size=n_channels),
        channel_phases=rng.uniform(0.0, 2.0 * np.pi, size=n_channels),
    )


def _band_limited_noise(rng, n_samples: int, sample_rate: int) -> np.ndarray:
    """Unit-variance noise restricted to the passband via the spectrum."""
    white = rng.standard_normal(n_samples)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n_samples, d=1.0 / sample_rate)
    spectrum[(freqs < _BAND_LOW_HZ) | (freqs > _BAND_HIGH_HZ)] = 0.0
    shaped = np.fft.irfft(spectrum, n=n_samples)
    std = shaped.std()
    return shaped / std if std > 0 else shaped


def _place_episodes(rng, duration: int, fraction: float) -> list:
    """Non-overlapping whole-second [start, end) episode intervals."""
    total = int(round(duration * fraction))
    if total <= 0:
        return []
    n_events = min(max(total // 10, 1), 4)
    base = total // n_events
    lengths = [base] * n_events
    lengths[-1] += total - base * n_events
    segment = duration // n_events
    intervals = []
    for i, length in enumerate(lengths):
        lo = i * segment + 1
        hi = min((i + 1) * segment, duration) - length - 1
        start = int(rng.integers(lo, hi + 1)) if hi >= lo else lo
        intervals.append((float(start), float(start + length)))
    return intervals


def _episode_envelope(n: int, sample_rate: int) -> np.ndarray:
    """Raised-cosine taper over the first and last quarter second."""
    env = np.ones(n)
    ramp = min(sample_rate // 4, n // 2)
    if ramp > 0:
        ridge = 0.5 - 0.5 * np.cos(np.linspace(0.0, np.pi, ramp))
        env[:ramp] = ridge
        env[n - ramp :] = ridge[::-1]
    return env


def generate_patient(
    patient_id: str,
    seed: int,
    duration: int = DEFAULT_DURATION,
    n_channels: int = DEFAULT_CHANNELS,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    seizure_fraction: float = DEFAULT_SEIZURE_FRACTION,
) -> tuple[Record, SeizureAnnotations]:
    """One patient's record and its planted episode annotations."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    trait_seq, noise_seq, place_seq = np.random.SeedSequence(seed).spawn(3)
    traits = _draw_traits(np.random.default_rng(trait_seq), n_channels)
    noise_rng = np.random.default_rng(noise_seq)
    intervals = _place_episodes(
        np.random.default_rng(place_seq), duration, seizure_fraction
    )

    n_samples = duration * sample_rate
    t = np.arange(n_samples) / sample_rate
    channels = np.empty((n_channels, n_samples))
    for c in range(n_channels):
        channels[c] = (
            _band_limited_noise(noise_rng, n_samples, sample_rate)
            * traits.background_scale
            * traits.channel_gains[c]
        )

    amp = traits.background_scale * traits.seizure_multiplier
    for start, end in intervals:
        a = int(start) * sample_rate
        b = int(end) * sample_rate
        env = _episode_envelope(b - a, sample_rate)
        for c in range(n_channels):
            wave = np.sin(
                2.0 * np.pi * traits.seizure_freq * t[a:b]
                + traits.channel_phases[c]
            )
            channels[c, a:b] += amp * traits.channel_gains[c] * env * wave

    record = Record(
        patient_id=patient_id, channels=channels, sample_rate=sample_rate
    )
    return record, SeizureAnnotations(intervals=tuple(intervals))


def generate_study(
    n_patients: int,
    seed: int,
    duration: int = DEFAULT_DURATION,
    n_channels: int = DEFAULT_CHANNELS,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    seizure_fraction: float = DEFAULT_SEIZURE_FRACTION,
) -> tuple[dict, dict]:
    """Records and annotations for a cohort, keyed by patient id."""
    if n_patients <= 0:
        raise ValueError("n_patients must be positive")
    child_seeds = np.random.SeedSequence(seed).spawn(n_patients)
    records = {}
    annotations = {}
    for i, child in enumerate(child_seeds):
        pid = f"patient{i + 1:02d}"
        rng_seed = child.generate_state(1)[0]
        record, ann = generate_patient(
            pid,
            int(rng_seed),
            duration=duration,
            n_channels=n_channels,
            sample_rate=sample_rate,
            seizure_fraction=seizure_fraction,
        )
        records[pid] = record
        annotations[pid] = ann
    return records, annotations
