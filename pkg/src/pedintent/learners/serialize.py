"""Binary persistence for the four model kinds.

Each file is little-endian: a 4-byte kind magic, u32 format version,
shape header, then f64/i32 payload arrays. Loading rejects unknown
magic and any version other than the writer's. Transient training
diagnostics (dual objective trace, loss history) are not persisted.
"""

import struct

import numpy as np

from ..errors import DataError
from .knn import KnnModel
from .mlp import MlpModel
from .svm import SvmModel
from .tree import TreeModel, TreeNode

VERSION = 1

MAGIC_SVM = b"PSVM"
MAGIC_KNN = b"PKNN"
MAGIC_MLP = b"PMLP"
MAGIC_TREE = b"PTRE"


def _pack_array(fh, arr, dtype):
    fh.write(np.ascontiguousarray(arr, dtype=dtype).tobytes())


class _Reader:
    def __init__(self, data, path):
        self.data = data
        self.path = path
        self.offset = 0

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.data):
            raise DataError("%s: truncated header" % (self.path,))
        vals = struct.unpack_from(fmt, self.data, self.offset)
        self.offset += size
        return vals if len(vals) > 1 else vals[0]

    def array(self, dtype, count):
        dtype = np.dtype(dtype)
        size = dtype.itemsize * count
        if self.offset + size > len(self.data):
            raise DataError("%s: truncated payload" % (self.path,))
        arr = np.frombuffer(self.data, dtype=dtype, count=count,
                            offset=self.offset).copy()
        self.offset += size
        return arr

    def done(self):
        if self.offset != len(self.data):
            raise DataError(
                "%s: %d trailing bytes" % (self.path, len(self.data) - self.offset)
            )


def save_model(model, path):
    with open(path, "wb") as fh:
        if isinstance(model, SvmModel):
            n, d = model.support_vectors.shape
            fh.write(MAGIC_SVM)
            fh.write(struct.pack("<IIIddQdB", VERSION, n, d, model.bias,
                                 model.C, model.iterations, model.kkt_gap,
                                 1 if model.converged else 0))
            _pack_array(fh, model.support_vectors, "<f8")
            _pack_array(fh, model.dual_coef, "<f8")
        elif isinstance(model, KnnModel):
            n, d = model.points.shape
            fh.write(MAGIC_KNN)
            fh.write(struct.pack("<IIII", VERSION, n, d, model.k))
            _pack_array(fh, model.points, "<f8")
            _pack_array(fh, model.labels, "<i8")
        elif isinstance(model, MlpModel):
            fh.write(MAGIC_MLP)
            fh.write(struct.pack("<IIII", VERSION, model.n_inputs,
                                 model.n_hidden, model.n_outputs))
            for arr in (model.W1, model.b1, model.W2, model.b2):
                _pack_array(fh, arr, "<f8")
        elif isinstance(model, TreeModel):
            fh.write(MAGIC_TREE)
            fh.write(struct.pack("<III", VERSION, len(model.nodes),
                                 model.n_features))
            nodes = model.nodes
            _pack_array(fh, [n.feature for n in nodes], "<i4")
            _pack_array(fh, [n.threshold for n in nodes], "<f8")
            _pack_array(fh, [n.left for n in nodes], "<i4")
            _pack_array(fh, [n.right for n in nodes], "<i4")
            _pack_array(fh, [n.label for n in nodes], "<i4")
            _pack_array(fh, [n.purity for n in nodes], "<f8")
        else:
            raise DataError("cannot serialize %r" % (type(model).__name__,))


def load_model(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise DataError("cannot read model file %s: %s" % (path, exc))
    if len(data) < 8:
        raise DataError("%s: not a model file" % (path,))
    magic = data[:4]
    rd = _Reader(data, path)
    rd.offset = 4
    version = rd.take("<I")
    if version != VERSION:
        raise DataError("%s: unsupported model version %d" % (path, version))
    if magic == MAGIC_SVM:
        n, d, bias, C, iters, gap, conv = rd.take("<IIddQdB")
        sv = rd.array("<f8", n * d).reshape(n, d)
        coef = rd.array("<f8", n)
        rd.done()
        return SvmModel(sv, coef, bias, C, bool(conv), int(iters), gap)
    if magic == MAGIC_KNN:
        n, d, k = rd.take("<III")
        points = rd.array("<f8", n * d).reshape(n, d)
        labels = rd.array("<i8", n).astype(np.intp)
        rd.done()
        return KnnModel(points, labels, int(k))
    if magic == MAGIC_MLP:
        d, hidden, outputs = rd.take("<III")
        W1 = rd.array("<f8", hidden * d).reshape(hidden, d)
        b1 = rd.array("<f8", hidden)
        W2 = rd.array("<f8", outputs * hidden).reshape(outputs, hidden)
        b2 = rd.array("<f8", outputs)
        rd.done()
        return MlpModel(W1, b1, W2, b2)
    if magic == MAGIC_TREE:
        n_nodes, n_features = rd.take("<II")
        feature = rd.array("<i4", n_nodes)
        threshold = rd.array("<f8", n_nodes)
        left = rd.array("<i4", n_nodes)
        right = rd.array("<i4", n_nodes)
        label = rd.array("<i4", n_nodes)
        purity = rd.array("<f8", n_nodes)
        rd.done()
        nodes = [TreeNode(int(feature[i]), float(threshold[i]), int(left[i]),
                          int(right[i]), int(label[i]), float(purity[i]))
                 for i in range(n_nodes)]
        return TreeModel(nodes, int(n_features))
    raise DataError("%s: unknown model magic %r" % (path, magic))
