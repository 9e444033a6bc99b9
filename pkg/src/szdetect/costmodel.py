"""Embedded-inference cost model for the classifier family.

Closed-form memory (bits to store a trained model) and computation
(operations to classify one incoming window) for simple feature
extraction and each classifier, plus ratios relative to logistic
regression, which is the cheapest on both axes.  Formulas are evaluated
in exact rational arithmetic; only the ratios are floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

CLASSIFIERS = ("sf", "knn", "cnn", "svm", "lr", "dbn")


@dataclass(frozen=True)
class CostParams:
    """Model variables with their reference default values."""

    window_size: int = 256
    train_windows: int = 10_000
    channels: int = 23
    features_per_channel: int = 9
    bit_resolution: int = 32
    neighbors: int = 5
    dbn_layers: int = 2
    peak_ratio: float = 0.125
    cnn_reduction_ratio: float = 0.25
    svm_support_ratio: float = 0.05

    def __post_init__(self):
        for name in (
            "window_size",
            "train_windows",
            "channels",
            "features_per_channel",
            "bit_resolution",
            "neighbors",
            "dbn_layers",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        # zero is allowed so formula limits can be evaluated; the CLI is
        # stricter and rejects non-positive overrides outright
        for name in ("peak_ratio", "cnn_reduction_ratio", "svm_support_ratio"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def feature_count(self) -> int:
        """CM, the length of a feature vector."""
        return self.channels * self.features_per_channel


def _frac(value) -> Fraction:
    """Exact rational from an int or a decimal-entered float."""
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(Decimal(str(value)))


def _plain(value: Fraction):
    """Collapse a rational to int when possible, else keep it exact."""
    if value.denominator == 1:
        return int(value)
    return value


def sf_ops(p: CostParams):
    """Operations to extract the simple features from one raw window."""
    w = _frac(p.window_size)
    return _plain(19 * w + 16 * _frac(p.peak_ratio) * w + 10)


def _memory_exact(kind: str, p: CostParams) -> Fraction:
    cm = _frac(p.feature_count)
    t = _frac(p.train_windows)
    r = _frac(p.bit_resolution)
    if kind == "sf":
        return Fraction(0)
    if kind == "knn":
        return t * r * (cm + 1)
    if kind == "cnn":
        return _frac(p.cnn_reduction_ratio) * t * r * (cm + 1)
    if kind == "svm":
        return _frac(p.svm_support_ratio) * t * r * (cm + 2)
    if kind == "lr":
        return r * (cm + 2)
    if kind == "dbn":
        return _memory_exact("lr", p) + _frac(p.dbn_layers) * r * cm * cm
    raise ValueError(f"unknown classifier kind {kind!r}")


def _computation_exact(kind: str, p: CostParams) -> Fraction:
    cm = _frac(p.feature_count)
    t = _frac(p.train_windows)
    n = _frac(p.neighbors)
    sf = _frac(sf_ops(p))
    if kind == "sf":
        return sf
    if kind == "knn":
        return 3 * t * (cm + n) + (n + 1) + sf
    if kind == "cnn":
        return 3 * _frac(p.cnn_reduction_ratio) * t * (cm + n) + (n + 1) + sf
    if kind == "svm":
        return 2 * cm + _frac(p.svm_support_ratio) * t + 5 + sf
    if kind == "lr":
        return 2 * cm + 5 + sf
    if kind == "dbn":
        return _computation_exact("lr", p) + _frac(p.dbn_layers) * cm * (2 * cm + 1)
    raise ValueError(f"unknown classifier kind {kind!r}")


def memory_bits(kind: str, p: CostParams):
    """Bits to store the trained classifier, per the closed-form model."""
    return _plain(_memory_exact(kind, p))


def computation_ops(kind: str, p: CostParams):
    """Operations to classify one window, feature extraction included."""
    return _plain(_computation_exact(kind, p))


@dataclass(frozen=True)
class CostEntry:
    memory_bits: object
    computation_ops: object
    memory_ratio_vs_lr: float | None
    computation_ratio_vs_lr: float | None


@dataclass(frozen=True)
class CostReport:
    params: CostParams
    entries: dict

    def __getitem__(self, kind: str) -> CostEntry:
        return self.entries[kind]


def relative_report(p: CostParams) -> CostReport:
    """Absolute costs plus ratios relative to logistic regression.

    SF carries no ratios (it is a stage, not a classifier); LR's own
    ratios are exactly 1.
    """
    lr_mem = _memory_exact("lr", p)
    lr_ops = _computation_exact("lr", p)
    entries = {}
    for kind in CLASSIFIERS:
        mem = _memory_exact(kind, p)
        ops = _computation_exact(kind, p)
        if kind == "sf":
            mem_ratio = ops_ratio = None
        else:
            mem_ratio = float(mem / lr_mem)
            ops_ratio = float(ops / lr_ops)
        entries[kind] = CostEntry(
            memory_bits=_plain(mem),
            computation_ops=_plain(ops),
            memory_ratio_vs_lr=mem_ratio,
            computation_ratio_vs_lr=ops_ratio,
        )
    return CostReport(params=p, entries=entries)


def dbn_actual_memory_bits(layer_sizes, bit_resolution: int) -> int:
    """Bits for a concrete network's classification path.

    Counts each layer's weight matrix and hidden bias plus the 2-way
    output layer at the given resolution.  The closed-form DBN row
    instead assumes layers as wide as the input, which understates a
    network with wider hidden layers; this is the exact count.
    """
    sizes = list(layer_sizes)
    params = 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        params += n_in * n_out + n_out
    params += sizes[-1] * 2 + 2
    return params * bit_resolution
