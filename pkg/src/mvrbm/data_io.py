"""IDX ingestion, MNIST preprocessing, model persistence and metrics CSV."""
import csv
import gzip
import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .drbm import DrbmParams
from .metrics import MetricsRecord
from .rbm import RbmParams, as_spins
from .special import format_levels, parse_levels

MODEL_FORMAT_VERSION = 1

CSV_HEADER = ("epoch", "metric", "value", "seed", "config_id")


class IdxError(ValueError):
    pass


class IdxMagicError(IdxError):
    pass


class IdxTruncatedError(IdxError):
    pass


class IdxTypeError(IdxError):
    pass


class ModelFormatError(ValueError):
    pass


class ModelVersionError(ModelFormatError):
    pass


# IDX type code -> big-endian numpy dtype
IDX_TYPES = {
    0x08: np.dtype(">u1"),
    0x09: np.dtype(">i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


@dataclass
class IdxTensor:
    type_code: int
    dims: tuple
    data: np.ndarray  # shaped by dims

    def __post_init__(self):
        if int(np.prod(self.dims, dtype=np.int64)) != self.data.size:
            raise IdxError("payload length does not match dims")


def parse_idx(raw, require_type=None):
    if len(raw) < 4:
        raise IdxTruncatedError("file shorter than the 4-byte magic")
    zero, type_code, ndim = struct.unpack(">HBB", raw[:4])
    if zero != 0:
        raise IdxMagicError(f"bad magic {raw[:4].hex()}")
    if type_code not in IDX_TYPES:
        raise IdxTypeError(f"unsupported IDX type code 0x{type_code:02x}")
    if require_type is not None and type_code != require_type:
        raise IdxTypeError(f"expected type 0x{require_type:02x}, got 0x{type_code:02x}")
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise IdxTruncatedError("truncated dimension header")
    dims = struct.unpack(f">{ndim}I", raw[4:header_end])
    dtype = IDX_TYPES[type_code]
    count = int(np.prod(dims, dtype=np.int64))
    expected = header_end + count * dtype.itemsize
    if len(raw) < expected:
        raise IdxTruncatedError(f"payload has {len(raw) - header_end} bytes, need {expected - header_end}")
    if len(raw) > expected:
        raise IdxError("trailing bytes after payload")
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=header_end).reshape(dims)
    return IdxTensor(type_code, tuple(dims), data)


def serialize_idx(tensor):
    dtype = IDX_TYPES[tensor.type_code]
    head = struct.pack(">HBB", 0, tensor.type_code, len(tensor.dims))
    head += struct.pack(f">{len(tensor.dims)}I", *tensor.dims)
    return head + np.ascontiguousarray(tensor.data, dtype=dtype).tobytes()


def _open(path, mode):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode)
    return open(path, mode)


def read_idx(path, require_type=None):
    with _open(path, "rb") as f:
        raw = f.read()
    return parse_idx(raw, require_type)


def write_idx(path, tensor):
    with _open(path, "wb") as f:
        f.write(serialize_idx(tensor))


def preprocess_images(raw):
    """(N, 28, 28) unsigned bytes -> (N, 784) floats in [0, 1]."""
    data = raw.data if isinstance(raw, IdxTensor) else np.asarray(raw)
    if isinstance(raw, IdxTensor) and raw.type_code != 0x08:
        raise IdxTypeError("images must be unsigned bytes")
    if data.ndim != 3 or data.shape[1:] != (28, 28):
        raise ValueError(f"expected (N, 28, 28) images, got {data.shape}")
    return data.reshape(data.shape[0], -1).astype(np.float64) / 255.0


def corrupt_gaussian(images, sigma, rng):
    """Add N(0, sigma^2) noise to raw pixel values and clamp to [0, 255]."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    images = np.asarray(images, dtype=np.float64)
    if sigma == 0:
        return images.copy()
    return np.clip(images + rng.normal(0.0, sigma, size=images.shape), 0.0, 255.0)


def load_mnist(images_path, labels_path):
    """Raw (N, 28, 28) pixel array and integer labels."""
    images = read_idx(images_path, require_type=0x08)
    labels = read_idx(labels_path, require_type=0x08)
    if images.data.ndim != 3 or labels.data.ndim != 1 or images.dims[0] != labels.dims[0]:
        raise IdxError("image/label files do not match")
    return images.data, labels.data.astype(np.intp)


# -- model files --------------------------------------------------------------

_MODEL_FIELDS = {
    "rbm": ("b", "c", "W"),
    "drbm": ("b", "c", "W1", "W2"),
}


def model_to_dict(params):
    kind = "rbm" if isinstance(params, RbmParams) else "drbm"
    arrays = dict(zip(_MODEL_FIELDS[kind], params.arrays))
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": kind,
        "s": format_levels(params.s),
        "shapes": {k: list(a.shape) for k, a in arrays.items()},
        # json writes floats with repr, which round-trips every finite double
        "params": {k: a.ravel().tolist() for k, a in arrays.items()},
    }


def model_from_dict(doc):
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ModelFormatError("missing format_version")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format version {doc['format_version']!r}")
    kind = doc.get("kind")
    if kind not in _MODEL_FIELDS:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    try:
        s = parse_levels(doc["s"])
        arrays = []
        for name in _MODEL_FIELDS[kind]:
            shape = tuple(doc["shapes"][name])
            arrays.append(np.array(doc["params"][name], dtype=np.float64).reshape(shape))
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"bad model file: {e}") from e
    cls = RbmParams if kind == "rbm" else DrbmParams
    return cls(*arrays, s=s)


def save_model(path, params):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(model_to_dict(params), f, indent=1)
        f.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ModelFormatError(f"not a model file: {e}") from e
    return model_from_dict(doc)


# -- datasets and metrics -----------------------------------------------------

def save_spins(path, data):
    np.savetxt(path, np.asarray(data, dtype=np.int64), fmt="%d", delimiter=",")


def load_spins(path):
    data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return as_spins(data)


def format_value(x):
    return repr(float(x))


def metrics_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow((r.epoch, r.metric, format_value(r.value), r.seed, r.config_id))
    return buf.getvalue()


def write_metrics_csv(path, records):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(metrics_csv(records))


def read_metrics_csv(path):
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: not a metrics CSV")
    return [MetricsRecord(int(e), m, float(v), int(s), c) for e, m, v, s, c in rows[1:]]
