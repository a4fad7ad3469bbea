"""Image ingestion and model persistence.

Images are read from Netpbm greymaps (P2 plain, P5 raw) or CSV integer grids.
Models are stored as a JSON envelope whose floats are written with
``float.hex`` so that a save/load round trip is bit-exact.
"""
import datetime
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import ClassifierModel
from .encoding import per_pixel_dim
from .exceptions import (
    DimensionError,
    FormatError,
    ModelIntegrityError,
    ParseError,
    VersionError,
)
from .pca import PrincipalComponents

MODEL_FORMAT = "qpcaclf-model"
FORMAT_VERSION = 1
ENCODING_ID = "direct-sum"
DEFAULT_MAX_VALUE = 255
IMAGE_SUFFIXES = (".pgm", ".csv")

_WHITESPACE = b" \t\n\r\v\f"


@dataclass(frozen=True, eq=False)
class RawImage:
    pixels: np.ndarray  # (height, width) integers
    max_value: int

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.int64)
        if px.ndim != 2 or px.size == 0:
            raise DimensionError(f"image must be a non-empty 2-D grid, got shape {px.shape}")
        if self.max_value < 1:
            raise ParseError(f"max value must be positive, got {self.max_value}")
        if px.min() < 0 or px.max() > self.max_value:
            raise ParseError(f"pixel values must lie in [0, {self.max_value}]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, RawImage):
            return NotImplemented
        return self.max_value == other.max_value and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    source: str = ""

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


# --- PGM ------------------------------------------------------------------


class _HeaderReader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def skip_space(self):
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos : self.pos + 1]
            if ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif ch in _WHITESPACE:
                self.pos += 1
            else:
                break

    def integer(self, what):
        self.skip_space()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1].isdigit():
            self.pos += 1
        if self.pos == start:
            if start >= len(self.data):
                raise ParseError(f"truncated header while reading {what}", start)
            raise ParseError(f"expected an integer for {what}", start)
        return int(self.data[start : self.pos])


def parse_pgm(data):
    """Parse a P2 or P5 greymap held in ``data`` (bytes)."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"not a greymap: magic {magic!r}")
    reader = _HeaderReader(data)
    reader.pos = 2
    if reader.pos < len(data) and data[2:3] not in _WHITESPACE and data[2:3] != b"#":
        raise ParseError("missing whitespace after magic number", 2)
    width = reader.integer("width")
    height = reader.integer("height")
    maxval = reader.integer("maxval")
    if width < 1 or height < 1:
        raise ParseError(f"bad dimensions {width}x{height}", reader.pos)
    if not 0 < maxval < 65536:
        raise ParseError(f"maxval {maxval} outside 1..65535", reader.pos)
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        if reader.pos >= len(data) or data[reader.pos : reader.pos + 1] not in _WHITESPACE:
            raise ParseError("missing whitespace before raster", reader.pos)
        start = reader.pos + 1
        width_bytes = 1 if maxval < 256 else 2
        need = count * width_bytes
        if len(data) - start < need:
            raise ParseError(
                f"truncated raster: need {need} bytes, have {len(data) - start}",
                len(data),
            )
        dtype = np.uint8 if width_bytes == 1 else np.dtype(">u2")
        pixels = np.frombuffer(data, dtype=dtype, count=count, offset=start)
        pixels = pixels.astype(np.int64)
        bad = np.flatnonzero(pixels > maxval)
        if bad.size:
            raise ParseError(
                f"sample {pixels[bad[0]]} exceeds maxval {maxval}",
                start + int(bad[0]) * width_bytes,
            )
    else:
        values = []
        for _ in range(count):
            offset = reader.pos
            v = reader.integer("pixel")
            if v > maxval:
                raise ParseError(f"sample {v} exceeds maxval {maxval}", offset)
            values.append(v)
        pixels = np.array(values, dtype=np.int64)
    return RawImage(pixels.reshape(height, width), maxval)


def write_pgm(image, binary=True):
    """Serialize ``image`` as P5 (``binary=True``) or P2."""
    h, w = image.pixels.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{image.max_value}\n".encode("ascii")
    if binary:
        dtype = np.uint8 if image.max_value < 256 else np.dtype(">u2")
        return header + image.pixels.astype(dtype).tobytes()
    lines = [" ".join(str(int(v)) for v in row) for row in image.pixels]
    return header + ("\n".join(lines) + "\n").encode("ascii")


# --- CSV ------------------------------------------------------------------

_CSV_OK = re.compile(rb"^[0-9,\s+-]*$")


def parse_csv_grid(data, max_value=DEFAULT_MAX_VALUE):
    """Parse comma-separated integer rows; blank lines are ignored."""
    text = data.decode("ascii", errors="strict") if isinstance(data, bytes) else data
    rows = []
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.strip()
        if stripped:
            row = []
            col = offset
            for cell in stripped.split(","):
                try:
                    row.append(int(cell.strip()))
                except ValueError:
                    raise ParseError(f"not an integer: {cell.strip()!r}", col) from None
                col += len(cell) + 1
            if rows and len(row) != len(rows[0]):
                raise ParseError(
                    f"ragged CSV row: {len(row)} cells, expected {len(rows[0])}", offset
                )
            rows.append(row)
        offset += len(line.encode("ascii"))
    if not rows:
        raise ParseError("empty CSV grid", 0)
    grid = np.array(rows, dtype=np.int64)
    if grid.min() < 0 or grid.max() > max_value:
        raise ParseError(f"CSV values must lie in [0, {max_value}]")
    return RawImage(grid, int(max_value))


def load_image(source, max_value=DEFAULT_MAX_VALUE):
    """Read a greymap or CSV grid from a path, bytes, or binary stream.

    ``max_value`` applies to CSV input only; greymaps declare their own.
    """
    name = None
    if isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            data = data.encode("ascii")
    else:
        name = os.fspath(source)
        with open(name, "rb") as fh:
            data = fh.read()
    if data[:1] == b"P" and data[1:2].isdigit():
        return parse_pgm(data)
    if name is not None and not name.lower().endswith(".csv") and not _CSV_OK.match(data):
        raise FormatError(f"{name}: unsupported image format")
    if not _CSV_OK.match(data):
        raise FormatError("unsupported image format (expected PGM P2/P5 or CSV)")
    return parse_csv_grid(data, max_value)


def to_feature_vector(image, source=""):
    """Row-major flattening scaled into [0, 1]."""
    values = image.pixels.reshape(-1).astype(np.float64) / image.max_value
    values = np.clip(values, 0.0, 1.0)
    values.setflags(write=False)
    return FeatureVector(values, source)


def iter_image_paths(paths):
    """Expand directories (sorted, non-recursive) into image files."""
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for child in sorted(p.iterdir()):
                if child.is_file() and child.suffix.lower() in IMAGE_SUFFIXES:
                    yield child
        else:
            yield p


def load_features(paths, max_value=DEFAULT_MAX_VALUE):
    return [
        to_feature_vector(load_image(p, max_value), str(p)) for p in iter_image_paths(paths)
    ]


# --- model files ----------------------------------------------------------


def _hex(values):
    return [float(v).hex() for v in np.asarray(values, dtype=np.float64).reshape(-1)]


def _unhex(values, what):
    try:
        return np.array([float.fromhex(v) for v in values], dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError(f"{what} must be a list of hex-float strings") from None


def creation_timestamp():
    """UTC ISO timestamp; honours SOURCE_DATE_EPOCH for reproducible builds."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        now = datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc)
    else:
        now = datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0)
    return now.isoformat().replace("+00:00", "Z")


def model_to_dict(model):
    pcs = model.components
    payload = {
        "format": MODEL_FORMAT,
        "format_version": FORMAT_VERSION,
        "encoding": ENCODING_ID,
        "n": model.n,
        "s": model.s,
        "k": model.k,
        "singular_values": _hex(pcs.singular_values),
        "components": [_hex(row) for row in pcs.components],
        "metadata": model.metadata,
    }
    if pcs.centered:
        payload["mean"] = _hex(pcs.mean)
    return payload


def dumps_model(model):
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"


def save_model(model, sink):
    """Write ``model`` to a path or text stream."""
    text = dumps_model(model)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text, encoding="utf-8")


def _require(payload, key, kind):
    if key not in payload:
        raise ParseError(f"model file is missing {key!r}")
    value = payload[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"{key!r} must be an integer")
    if kind is not int and not isinstance(value, kind):
        raise ParseError(f"{key!r} has the wrong type")
    return value


def model_from_dict(payload):
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ParseError("not a qpcaclf model file")
    version = _require(payload, "format_version", int)
    if version != FORMAT_VERSION:
        raise VersionError(
            f"model format version {version} is not supported (expected {FORMAT_VERSION})"
        )
    encoding = _require(payload, "encoding", str)
    if encoding != ENCODING_ID:
        raise ParseError(f"unknown encoding {encoding!r}")
    n = _require(payload, "n", int)
    s = _require(payload, "s", int)
    k = _require(payload, "k", int)
    sv = _unhex(_require(payload, "singular_values", list), "singular_values")
    rows = _require(payload, "components", list)
    if len(rows) != s or sv.size != s:
        raise ModelIntegrityError(
            f"declared s={s} but found {len(rows)} components and {sv.size} singular values"
        )
    comps = np.array([_unhex(r, "component") for r in rows]) if rows else np.zeros((0, n))
    if s < 1 or comps.shape != (s, n):
        raise ModelIntegrityError(f"components have shape {comps.shape}, expected ({s}, {n})")
    if k != per_pixel_dim(s):
        raise ModelIntegrityError(f"k={k} does not equal s + 2 = {per_pixel_dim(s)}")
    if not (np.all(np.isfinite(comps)) and np.all(np.isfinite(sv))):
        raise ModelIntegrityError("non-finite values in model file")
    metadata = payload.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ParseError("'metadata' must be an object")
    mean = None
    if "mean" in payload:
        mean = _unhex(payload["mean"], "mean")
    try:
        pcs = PrincipalComponents(comps, sv, mean is not None, mean)
    except (ModelIntegrityError, ValueError) as exc:
        raise ModelIntegrityError(str(exc)) from None
    return ClassifierModel.from_components(pcs, metadata)


def loads_model(text):
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed model JSON: {exc.msg}", exc.pos) from None
    return model_from_dict(payload)


def load_model(source):
    """Read a model from a path or text stream, re-validating orthonormality."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except UnicodeDecodeError:
            raise ParseError("model file is not UTF-8 text") from None
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return loads_model(text)


__all__ = [
    "RawImage",
    "FeatureVector",
    "parse_pgm",
    "write_pgm",
    "parse_csv_grid",
    "load_image",
    "to_feature_vector",
    "iter_image_paths",
    "load_features",
    "save_model",
    "load_model",
    "dumps_model",
    "loads_model",
    "creation_timestamp",
]
