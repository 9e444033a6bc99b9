"""Binary serialization for trained models.

A saved model is a single little-endian file: a four-byte magic, a
format version, a one-byte model tag, an optional feature-scaler block,
then the model payload with explicit dimension headers.  Writing the
same model twice produces identical bytes, so artifacts can be compared
with a plain file hash.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .classifiers import Dataset, KnnModel, LrModel, SvmModel
from .dbn import DbnModel, DbnTrainingConfig, Rbm
from .preprocessing import MinMaxScaler

MAGIC = b"SZDT"
VERSION = 1

_TAGS = {"lr": 1, "svm": 2, "knn": 3, "cnn": 4, "dbn": 5}
_KINDS = {code: kind for kind, code in _TAGS.items()}
_KERNEL_CODES = {"rbf": 1, "poly": 2, "sigmoid": 3}
_KERNEL_NAMES = {code: name for name, code in _KERNEL_CODES.items()}
_MODE_CODES = {"full": 1, "top": 2}
_MODE_NAMES = {code: name for name, code in _MODE_CODES.items()}


class ModelFormatError(ValueError):
    """Raised when a model file is malformed or truncated."""


@dataclass(frozen=True)
class LoadedModel:
    kind: str
    model: object
    scaler: MinMaxScaler | None


class _Writer:
    def __init__(self):
        self.parts = []

    def u8(self, v: int):
        self.parts.append(struct.pack("<B", v))

    def u16(self, v: int):
        self.parts.append(struct.pack("<H", v))

    def u32(self, v: int):
        self.parts.append(struct.pack("<I", v))

    def i64(self, v: int):
        self.parts.append(struct.pack("<q", v))

    def f64(self, v: float):
        self.parts.append(struct.pack("<d", float(v)))

    def array(self, values):
        # row-major float64, dimensions are written by the caller
        self.parts.append(np.ascontiguousarray(values, dtype="<f8").tobytes())

    def bytes(self, raw: bytes):
        self.parts.append(raw)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError("model file is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 1
        raw = self._take(8 * count)
        return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()

    def bytes(self, n: int) -> bytes:
        return self._take(n)

    def done(self) -> bool:
        return self.pos == len(self.data)


def _write_scaler(w: _Writer, scaler: MinMaxScaler | None):
    if scaler is None:
        w.u8(0)
        return
    w.u8(1)
    w.u32(len(scaler.mins))
    w.array(scaler.mins)
    w.array(scaler.maxes)


def _read_scaler(r: _Reader) -> MinMaxScaler | None:
    if not r.u8():
        return None
    dim = r.u32()
    mins = r.array((dim,))
    maxes = r.array((dim,))
    return MinMaxScaler(mins=mins, maxes=maxes)


def _write_lr(w: _Writer, model: LrModel):
    w.u32(len(model.weights))
    w.array(model.weights)
    w.f64(model.bias)
    w.f64(model.rate)
    w.u32(model.iters)


def _read_lr(r: _Reader) -> LrModel:
    dim = r.u32()
    weights = r.array((dim,))
    return LrModel(weights=weights, bias=r.f64(), rate=r.f64(), iters=r.u32())


def _write_svm(w: _Writer, model: SvmModel):
    w.u8(_KERNEL_CODES[model.kernel])
    w.f64(model.gamma)
    w.u32(model.degree)
    w.f64(model.coef0)
    w.f64(model.c_reg)
    w.f64(model.tol)
    w.f64(model.bias)
    n, dim = model.support_vectors.shape
    w.u32(n)
    w.u32(dim)
    w.array(model.support_vectors)
    w.array(model.dual_coef)


def _read_svm(r: _Reader) -> SvmModel:
    code = r.u8()
    if code not in _KERNEL_NAMES:
        raise ModelFormatError(f"unknown kernel code {code}")
    kernel = _KERNEL_NAMES[code]
    gamma = r.f64()
    degree = r.u32()
    coef0 = r.f64()
    c_reg = r.f64()
    tol = r.f64()
    bias = r.f64()
    n = r.u32()
    dim = r.u32()
    return SvmModel(
        kernel=kernel,
        gamma=gamma,
        degree=degree,
        coef0=coef0,
        c_reg=c_reg,
        tol=tol,
        support_vectors=r.array((n, dim)),
        dual_coef=r.array((n,)),
        bias=bias,
    )


def _write_knn(w: _Writer, model: KnnModel):
    n, dim = model.train.vectors.shape
    w.u32(model.k)
    w.u32(n)
    w.u32(dim)
    w.array(model.train.vectors)
    w.bytes(np.asarray(model.train.labels, dtype=np.uint8).tobytes())


def _read_knn(r: _Reader, condensed: bool) -> KnnModel:
    k = r.u32()
    n = r.u32()
    dim = r.u32()
    vectors = r.array((n, dim))
    labels = np.frombuffer(r.bytes(n), dtype=np.uint8).astype(int)
    return KnnModel(train=Dataset(vectors, labels), k=k, condensed=condensed)


def _write_dbn(w: _Writer, model: DbnModel):
    sizes = model.layer_sizes
    w.u32(len(model.rbms))
    for size in sizes:
        w.u32(size)
    for rbm in model.rbms:
        w.array(rbm.weights)
        w.array(rbm.visible_bias)
        w.array(rbm.hidden_bias)
    w.array(model.output_weights)
    w.array(model.output_bias)
    cfg = model.config
    w.u32(cfg.pretrain_epochs)
    w.f64(cfg.pretrain_rate)
    w.u32(cfg.finetune_iters)
    w.f64(cfg.finetune_rate)
    w.u32(cfg.batch_size)
    w.u8(_MODE_CODES[cfg.mode])
    w.i64(cfg.seed)


def _read_dbn(r: _Reader, scaler: MinMaxScaler | None) -> DbnModel:
    n_rbms = r.u32()
    sizes = [r.u32() for _ in range(n_rbms + 1)]
    rbms = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        rbms.append(
            Rbm(
                weights=r.array((n_in, n_out)),
                visible_bias=r.array((n_in,)),
                hidden_bias=r.array((n_out,)),
            )
        )
    output_weights = r.array((sizes[-1], 2))
    output_bias = r.array((2,))
    config = DbnTrainingConfig(
        layer_sizes=tuple(sizes),
        pretrain_epochs=r.u32(),
        pretrain_rate=r.f64(),
        finetune_iters=r.u32(),
        finetune_rate=r.f64(),
        batch_size=r.u32(),
        mode=_MODE_NAMES[r.u8()],
        seed=r.i64(),
    )
    return DbnModel(
        rbms=tuple(rbms),
        output_weights=output_weights,
        output_bias=output_bias,
        scaler=scaler,
        config=config,
    )


def model_kind(model) -> str:
    if isinstance(model, LrModel):
        return "lr"
    if isinstance(model, SvmModel):
        return "svm"
    if isinstance(model, KnnModel):
        return "cnn" if model.condensed else "knn"
    if isinstance(model, DbnModel):
        return "dbn"
    raise TypeError(f"cannot serialize {type(model).__name__}")


def serialize_model(model, scaler: MinMaxScaler | None = None) -> bytes:
    kind = model_kind(model)
    if isinstance(model, DbnModel) and scaler is None:
        scaler = model.scaler
    w = _Writer()
    w.bytes(MAGIC)
    w.u16(VERSION)
    w.u8(_TAGS[kind])
    _write_scaler(w, scaler)
    if kind == "lr":
        _write_lr(w, model)
    elif kind == "svm":
        _write_svm(w, model)
    elif kind in ("knn", "cnn"):
        _write_knn(w, model)
    else:
        _write_dbn(w, model)
    return w.getvalue()


def deserialize_model(data: bytes) -> LoadedModel:
    r = _Reader(data)
    if r.bytes(4) != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version = r.u16()
    if version != VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    tag = r.u8()
    if tag not in _KINDS:
        raise ModelFormatError(f"unknown model tag {tag}")
    kind = _KINDS[tag]
    scaler = _read_scaler(r)
    if kind == "lr":
        model = _read_lr(r)
    elif kind == "svm":
        model = _read_svm(r)
    elif kind in ("knn", "cnn"):
        model = _read_knn(r, condensed=kind == "cnn")
    else:
        model = _read_dbn(r, scaler)
    if not r.done():
        raise ModelFormatError("trailing bytes after model payload")
    return LoadedModel(kind=kind, model=model, scaler=scaler)


def save_model(path, model, scaler: MinMaxScaler | None = None) -> None:
    data = serialize_model(model, scaler)
    with open(path, "wb") as fh:
        fh.write(data)


def load_model(path) -> LoadedModel:
    with open(path, "rb") as fh:
        data = fh.read()
    return deserialize_model(data)
