"""Feature vectors and the binary interchange format for them.

A feature file holds float32 vectors keyed by sample id:

    magic  b"CNNF"
    u32    version (1)
    u64    record count
    u32    dimension
    then per record: u16 id byte-length, UTF-8 id, dimension * f32

All integers and floats are little-endian. The format carries externally
computed CNN activations into the pipeline and doubles as the on-disk
form for HOG and LBP vectors.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

MAGIC = b"CNNF"
VERSION = 1

SOURCES = ("hog", "lbp", "cnn")

# vector lengths at the pipeline's canonical crop geometry; descriptor
# functions can produce other lengths on other input sizes
CANONICAL_LENGTH = {"hog": 3600, "lbp": 59, "cnn": 4096}


@dataclass(frozen=True)
class FeatureVector:
    sample_id: str
    source: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise DataError("unknown feature source %r" % (self.source,))
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise DataError("feature values must be a non-empty vector")
        if not np.isfinite(vals).all():
            raise DataError(
                "non-finite feature values for sample %r" % (self.sample_id,)
            )
        object.__setattr__(self, "values", vals)


def write_feature_file(path, vectors, dimension=None):
    """Write FeatureVectors in file order. All must share one dimension."""
    vectors = list(vectors)
    if dimension is None:
        if not vectors:
            raise DataError("cannot infer dimension from an empty record set")
        dimension = vectors[0].values.size
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(vectors)))
        fh.write(struct.pack("<I", dimension))
        for vec in vectors:
            if vec.values.size != dimension:
                raise DataError(
                    "record %r has dimension %d, file dimension is %d"
                    % (vec.sample_id, vec.values.size, dimension)
                )
            ident = vec.sample_id.encode("utf-8")
            if len(ident) > 0xFFFF:
                raise DataError("sample id too long: %r" % (vec.sample_id,))
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(vec.values.astype("<f4").tobytes())


def read_feature_file(path, source, expected_dim=None):
    """Read a feature file into an ordered {sample_id: FeatureVector} map.

    Rejects bad magic, unknown version, dimension mismatch, duplicate
    ids, truncation, trailing bytes and non-finite values.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise DataError("cannot read feature file %s: %s" % (path, exc))
    if len(data) < 20 or data[:4] != MAGIC:
        raise DataError("%s: not a feature file (bad magic)" % (path,))
    version, = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise DataError("%s: unsupported version %d" % (path, version))
    count, = struct.unpack_from("<Q", data, 8)
    dim, = struct.unpack_from("<I", data, 16)
    if expected_dim is not None and dim != expected_dim:
        raise DataError(
            "%s: dimension %d, expected %d" % (path, dim, expected_dim)
        )
    if dim == 0:
        raise DataError("%s: zero dimension" % (path,))
    out = {}
    offset = 20
    vec_bytes = 4 * dim
    for _ in range(count):
        if offset + 2 > len(data):
            raise DataError("%s: truncated record header" % (path,))
        id_len, = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + vec_bytes > len(data):
            raise DataError("%s: truncated record" % (path,))
        sample_id = data[offset:offset + id_len].decode("utf-8")
        offset += id_len
        values = np.frombuffer(data, dtype="<f4", count=dim, offset=offset)
        offset += vec_bytes
        if sample_id in out:
            raise DataError("%s: duplicate sample id %r" % (path, sample_id))
        if not np.isfinite(values).all():
            raise DataError(
                "%s: non-finite values for sample %r" % (path, sample_id)
            )
        out[sample_id] = FeatureVector(sample_id, source, values.astype(np.float64))
    if offset != len(data):
        raise DataError("%s: %d trailing bytes" % (path, len(data) - offset))
    return out


def load_cnn_features(path):
    """Load externally computed CNN activations; dimension must be 4096."""
    return read_feature_file(path, "cnn", expected_dim=CANONICAL_LENGTH["cnn"])


def dump_feature_text(path_in, path_out, source="cnn"):
    """Binary feature file -> text, one `id<TAB>v v v ...` line per record.

    Values are printed with %.9g, which round-trips float32 exactly.
    """
    table = read_feature_file(path_in, source)
    with open(path_out, "w", encoding="utf-8") as fh:
        for sample_id, vec in table.items():
            vals = " ".join("%.9g" % v for v in vec.values.astype(np.float32))
            fh.write("%s\t%s\n" % (sample_id, vals))


def load_feature_text(path_in, path_out, source="cnn"):
    """Text dump back to the binary format (inverse of dump_feature_text)."""
    vectors = []
    seen = set()
    dim = None
    with open(path_in, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(
                    "%s:%d: expected `id<TAB>values`" % (path_in, lineno)
                )
            sample_id, blob = parts
            if sample_id in seen:
                raise DataError(
                    "%s:%d: duplicate sample id %r" % (path_in, lineno, sample_id)
                )
            seen.add(sample_id)
            try:
                values = np.array([float(t) for t in blob.split()], dtype=np.float32)
            except ValueError:
                raise DataError("%s:%d: bad float" % (path_in, lineno))
            if values.size == 0:
                raise DataError("%s:%d: empty vector" % (path_in, lineno))
            if dim is None:
                dim = values.size
            elif values.size != dim:
                raise DataError(
                    "%s:%d: dimension %d, file started with %d"
                    % (path_in, lineno, values.size, dim)
                )
            vectors.append(FeatureVector(sample_id, source, values.astype(np.float64)))
    if not vectors:
        raise DataError("%s: no records" % (path_in,))
    write_feature_file(path_out, vectors, dim)
