"""EEG ingestion: EDF and CSV readers, seizure annotations, windowing.

Only classic EDF is supported: one global 256-byte ASCII header, 256
bytes of per-signal header fields, and data records of interleaved
little-endian two's-complement 16-bit samples.  All retained signals
must share one integer sample rate; signals labeled "EDF Annotations"
are skipped (labels come exclusively from an external annotation CSV).

Windows are one second long.  A window is labeled as seizure when at
least half of its samples fall inside an annotated seizure interval.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EDF_GLOBAL_HEADER_BYTES = 256
EDF_SIGNAL_HEADER_BYTES = 256
EDF_ANNOTATION_LABEL = "EDF Annotations"


class IngestionError(ValueError):
    """Malformed input data (EDF, CSV, or annotation file)."""


class EdfError(IngestionError):
    """Malformed or unsupported EDF file."""


@dataclass(frozen=True)
class Record:
    """One patient recording: C channels of equal length at one rate.

    The channel array is truncated to a whole number of seconds on
    construction and frozen, so records are safe to share.
    """

    patient_id: str
    channels: np.ndarray
    sample_rate: int

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[0] < 1:
            raise ValueError("channels must be a C x n_samples array with C >= 1")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be a positive integer")
        whole = (ch.shape[1] // self.sample_rate) * self.sample_rate
        if whole == 0:
            raise ValueError(
                f"record shorter than one second ({ch.shape[1]} samples "
                f"at {self.sample_rate} Hz)"
            )
        ch = np.ascontiguousarray(ch[:, :whole])
        ch.setflags(write=False)
        object.__setattr__(self, "channels", ch)

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration(self) -> int:
        """Whole seconds in the record."""
        return self.n_samples // self.sample_rate


@dataclass(frozen=True)
class SeizureAnnotations:
    """Half-open [start, end) seizure intervals, in seconds.

    Intervals are validated, sorted, and merged on construction, so the
    stored list is non-overlapping and ordered.
    """

    intervals: tuple = field(default=())

    def __post_init__(self):
        merged = merge_intervals(self.intervals)
        object.__setattr__(self, "intervals", merged)

    def __len__(self) -> int:
        return len(self.intervals)


@dataclass(frozen=True)
class LabeledWindow:
    """One second of samples (C x W) with a binary seizure label."""

    patient_id: str
    window_index: int
    samples: np.ndarray
    label: int


def merge_intervals(intervals) -> tuple:
    """Validate, sort, and merge possibly-overlapping intervals."""
    cleaned = []
    for start, end in intervals:
        start, end = float(start), float(end)
        if start < 0:
            raise IngestionError(f"interval start {start} is negative")
        if start >= end:
            raise IngestionError(f"interval [{start}, {end}) is empty or inverted")
        cleaned.append((start, end))
    cleaned.sort()
    merged: list[tuple[float, float]] = []
    for start, end in cleaned:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return tuple(merged)


# ---------------------------------------------------------------------------
# EDF


def _header_field(raw: bytes, offset: int, width: int) -> str:
    return raw[offset : offset + width].decode("ascii", errors="replace").strip()


def _header_int(raw: bytes, offset: int, width: int, name: str) -> int:
    text = _header_field(raw, offset, width)
    try:
        return int(text)
    except ValueError:
        raise EdfError(f"non-numeric {name} field: {text!r}") from None


def _header_float(raw: bytes, offset: int, width: int, name: str) -> float:
    text = _header_field(raw, offset, width)
    try:
        return float(text)
    except ValueError:
        raise EdfError(f"non-numeric {name} field: {text!r}") from None


def _read_edf_raw(path):
    """Parse an EDF file into header fields plus per-signal digital arrays.

    Returns (labels, digitals, phys_ranges, dig_ranges, sample_rate)
    where digitals is a list of int16 arrays, one per signal, in file
    order.  Annotation signals are still present here; ``read_edf``
    filters them.
    """
    data = Path(path).read_bytes()
    if len(data) < EDF_GLOBAL_HEADER_BYTES:
        raise EdfError("file shorter than the 256-byte EDF header")

    n_records = _header_int(data, 236, 8, "record count")
    record_duration = _header_float(data, 244, 8, "record duration")
    ns = _header_int(data, 252, 4, "signal count")
    header_bytes = _header_int(data, 184, 8, "header size")

    if ns < 1:
        raise EdfError(f"signal count must be positive, got {ns}")
    if n_records < 0:
        raise EdfError(f"record count must be non-negative, got {n_records}")
    if record_duration <= 0:
        raise EdfError(f"record duration must be positive, got {record_duration}")
    expected_header = EDF_GLOBAL_HEADER_BYTES + ns * EDF_SIGNAL_HEADER_BYTES
    if header_bytes != expected_header:
        raise EdfError(
            f"header size field says {header_bytes} bytes, "
            f"but {ns} signals require {expected_header}"
        )
    if len(data) < expected_header:
        raise EdfError("file ends inside the signal headers")

    # per-signal fields are stored field-major after the global header
    base = EDF_GLOBAL_HEADER_BYTES

    def signal_fields(width, parse, name):
        nonlocal base
        values = [parse(data, base + i * width, width, name) for i in range(ns)]
        base += ns * width
        return values

    def text_fields(width):
        nonlocal base
        values = [_header_field(data, base + i * width, width) for i in range(ns)]
        base += ns * width
        return values

    labels = text_fields(16)
    text_fields(80)  # transducer
    text_fields(8)  # physical dimension
    phys_min = signal_fields(8, _header_float, "physical minimum")
    phys_max = signal_fields(8, _header_float, "physical maximum")
    dig_min = signal_fields(8, _header_int, "digital minimum")
    dig_max = signal_fields(8, _header_int, "digital maximum")
    text_fields(80)  # prefiltering
    samples_per_record = signal_fields(8, _header_int, "samples per record")
    text_fields(32)  # reserved

    for c, spr in enumerate(samples_per_record):
        if spr <= 0:
            raise EdfError(f"signal {c} declares {spr} samples per record")
    for c in range(ns):
        if dig_max[c] == dig_min[c]:
            raise EdfError(f"signal {c} has an empty digital range")

    record_samples = sum(samples_per_record)
    needed = expected_header + n_records * record_samples * 2
    if len(data) < needed:
        raise EdfError(
            f"truncated data records: need {needed} bytes, file has {len(data)}"
        )

    flat = np.frombuffer(
        data, dtype="<i2", count=n_records * record_samples, offset=expected_header
    )
    digitals = [np.empty(n_records * spr, dtype=np.int16) for spr in samples_per_record]
    offsets = np.cumsum([0] + samples_per_record)
    for r in range(n_records):
        rec = flat[r * record_samples : (r + 1) * record_samples]
        for c, spr in enumerate(samples_per_record):
            digitals[c][r * spr : (r + 1) * spr] = rec[offsets[c] : offsets[c] + spr]

    rates = [spr / record_duration for spr in samples_per_record]
    return (
        labels,
        digitals,
        list(zip(phys_min, phys_max)),
        list(zip(dig_min, dig_max)),
        rates,
    )


def read_edf(path, patient_id: str | None = None) -> Record:
    """Read a classic EDF file into a Record of physical values.

    Physical values follow the per-signal affine map
    physical_min + (digital - digital_min) * physical_range / digital_range.
    Signals labeled "EDF Annotations" are dropped; the remaining signals
    must all share one integer sample rate.
    """
    labels, digitals, phys_ranges, dig_ranges, rates = _read_edf_raw(path)

    kept = [i for i, lab in enumerate(labels) if lab != EDF_ANNOTATION_LABEL]
    if not kept:
        raise EdfError("no data signals in file (annotation signals only)")

    kept_rates = {rates[i] for i in kept}
    if len(kept_rates) != 1:
        raise EdfError(
            f"signal rate mismatch: rates {sorted(kept_rates)} Hz; resampling "
            "is not supported"
        )
    rate = kept_rates.pop()
    if rate != int(rate) or rate <= 0:
        raise EdfError(f"non-integer sample rate {rate} Hz")

    channels = np.empty((len(kept), len(digitals[kept[0]])))
    for row, i in enumerate(kept):
        pmin, pmax = phys_ranges[i]
        dmin, dmax = dig_ranges[i]
        scale = (pmax - pmin) / (dmax - dmin)
        channels[row] = pmin + (digitals[i].astype(float) - dmin) * scale

    if patient_id is None:
        patient_id = Path(path).stem
    return Record(patient_id=patient_id, channels=channels, sample_rate=int(rate))


def _format_header_number(value: float, width: int) -> str:
    """Render a number into a fixed-width ASCII header field."""
    if value == int(value) and abs(value) < 10**width:
        text = str(int(value))
    else:
        for precision in range(width - 1, 0, -1):
            text = f"{value:.{precision}g}"
            if len(text) <= width:
                break
    if len(text) > width:
        raise EdfError(f"value {value} does not fit an {width}-char header field")
    return text.ljust(width)


def write_edf_digital(
    path,
    patient_id: str,
    digitals,
    sample_rate: int,
    phys_ranges,
    dig_ranges,
) -> None:
    """Write pre-quantized int16 signals as a classic EDF file.

    One data record per second; all signals share ``sample_rate``.
    """
    digitals = [np.asarray(d, dtype=np.int16) for d in digitals]
    ns = len(digitals)
    if ns < 1:
        raise EdfError("need at least one signal")
    n_samples = len(digitals[0])
    if any(len(d) != n_samples for d in digitals):
        raise EdfError("all signals must have equal length")
    n_records = n_samples // sample_rate
    if n_records * sample_rate != n_samples:
        raise EdfError("signal length must be a whole number of seconds")

    header = bytearray()

    def put(text: str, width: int):
        enc = text.encode("ascii")[:width]
        header.extend(enc.ljust(width))

    put("0", 8)
    put(patient_id, 80)
    put(patient_id, 80)
    put("01.01.00", 8)
    put("00.00.00", 8)
    put(str(EDF_GLOBAL_HEADER_BYTES + ns * EDF_SIGNAL_HEADER_BYTES), 8)
    put("", 44)
    put(str(n_records), 8)
    put("1", 8)
    put(str(ns), 4)

    for c in range(ns):
        put(f"ch{c}", 16)
    for _ in range(ns):
        put("", 80)
    for _ in range(ns):
        put("uV", 8)
    for pmin, _ in phys_ranges:
        header.extend(_format_header_number(pmin, 8).encode("ascii"))
    for _, pmax in phys_ranges:
        header.extend(_format_header_number(pmax, 8).encode("ascii"))
    for dmin, _ in dig_ranges:
        header.extend(_format_header_number(dmin, 8).encode("ascii"))
    for _, dmax in dig_ranges:
        header.extend(_format_header_number(dmax, 8).encode("ascii"))
    for _ in range(ns):
        put("", 80)
    for _ in range(ns):
        put(str(sample_rate), 8)
    for _ in range(ns):
        put("", 32)

    with open(path, "wb") as fh:
        fh.write(bytes(header))
        for r in range(n_records):
            for d in digitals:
                fh.write(d[r * sample_rate : (r + 1) * sample_rate].astype("<i2").tobytes())


def write_edf(path, record: Record, digital_range=(-32768, 32767)) -> None:
    """Quantize a Record to 16-bit and write it as classic EDF.

    Each channel's physical range is its own [min, max] (widened when
    degenerate), so quantization error is at most half a digital step
    per sample.
    """
    dmin, dmax = digital_range
    digitals = []
    phys_ranges = []
    for ch in record.channels:
        pmin, pmax = float(ch.min()), float(ch.max())
        if pmin == pmax:
            pmax = pmin + 1.0
        scale = (dmax - dmin) / (pmax - pmin)
        dig = np.rint((ch - pmin) * scale + dmin)
        digitals.append(np.clip(dig, dmin, dmax).astype(np.int16))
        phys_ranges.append((pmin, pmax))
    write_edf_digital(
        path,
        record.patient_id,
        digitals,
        record.sample_rate,
        phys_ranges,
        [digital_range] * record.n_channels,
    )


# ---------------------------------------------------------------------------
# CSV signals and annotations


def read_csv(path, sample_rate: int, patient_id: str | None = None) -> Record:
    """Read a samples-by-channels CSV (optional header row) at a given rate."""
    if sample_rate <= 0:
        raise IngestionError("sample_rate must be positive")
    rows = []
    n_cols = None
    with open(path, newline="") as fh:
        for row_num, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if n_cols is None:
                n_cols = len(row)
                try:
                    rows.append([float(cell) for cell in row])
                    continue
                except ValueError:
                    continue  # header row
            if len(row) != n_cols:
                raise IngestionError(
                    f"row {row_num} has {len(row)} columns, expected {n_cols}"
                )
            parsed = []
            for col_num, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise IngestionError(
                        f"non-numeric cell {cell!r} at row {row_num}, column {col_num}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise IngestionError("CSV contains no sample rows")
    channels = np.array(rows, dtype=float).T
    if patient_id is None:
        patient_id = Path(path).stem
    return Record(patient_id=patient_id, channels=channels, sample_rate=sample_rate)


def read_annotations(path) -> dict[str, SeizureAnnotations]:
    """Read a record_id,start_second,end_second CSV into per-record annotations."""
    intervals: dict[str, list] = {}
    with open(path, newline="") as fh:
        for row_num, row in enumerate(csv.reader(fh), start=1):
            if not row or (row_num == 1 and _looks_like_header(row)):
                continue
            if len(row) != 3:
                raise IngestionError(
                    f"annotation row {row_num} has {len(row)} fields, expected 3"
                )
            record_id = row[0].strip()
            try:
                start, end = float(row[1]), float(row[2])
            except ValueError:
                raise IngestionError(
                    f"non-numeric interval in annotation row {row_num}: {row[1:]!r}"
                ) from None
            intervals.setdefault(record_id, []).append((start, end))
    return {rid: SeizureAnnotations(tuple(iv)) for rid, iv in intervals.items()}


def _looks_like_header(row) -> bool:
    # only a well-shaped row with non-numeric interval fields is a header;
    # a malformed first row must still be reported as an error
    if len(row) != 3:
        return False
    try:
        float(row[1]), float(row[2])
        return False
    except ValueError:
        return True


# ---------------------------------------------------------------------------
# Windowing


def _snap(value: float) -> float:
    """Snap near-integer floats so boundary arithmetic is exact."""
    nearest = round(value)
    return float(nearest) if abs(value - nearest) < 1e-9 else value


def _samples_inside(window_index: int, rate: int, start: float, end: float) -> int:
    """Count samples of one window whose timestamps lie in [start, end)."""
    lo = _snap((start - window_index) * rate)
    hi = _snap((end - window_index) * rate)
    h_min = max(0, math.ceil(lo))
    h_max = min(rate - 1, math.ceil(hi) - 1)
    return max(0, h_max - h_min + 1)


def label_windows(record: Record, ann: SeizureAnnotations) -> list[LabeledWindow]:
    """Cut a record into 1-second windows with majority-overlap labels.

    Window s is labeled seizure when at least half its samples fall
    inside some annotated interval.  Intervals reaching past the end of
    the record are clipped with a warning; an empty annotation list
    yields all-zero labels.
    """
    rate = record.sample_rate
    duration = record.duration
    intervals = []
    for start, end in ann.intervals:
        if end > duration:
            warnings.warn(
                f"annotation [{start}, {end}) exceeds record duration "
                f"{duration}s; clipping",
                stacklevel=2,
            )
            end = float(duration)
        if start < end:
            intervals.append((start, end))

    windows = []
    for s in range(duration):
        inside = sum(_samples_inside(s, rate, a, b) for a, b in intervals)
        label = 1 if 2 * inside >= rate else 0
        windows.append(
            LabeledWindow(
                patient_id=record.patient_id,
                window_index=s,
                samples=record.channels[:, s * rate : (s + 1) * rate],
                label=label,
            )
        )
    return windows
