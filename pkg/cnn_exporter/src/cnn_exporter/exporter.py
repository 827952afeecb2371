"""Export penultimate-layer AlexNet activations to feature files.

Reads a tab-separated manifest of sample ids and image paths, runs
each image through AlexNet, captures the output of the second fully
connected layer (classifier[4], 4096 wide, taken before its ReLU), and
writes the vectors in the consumer's interchange format:

    magic  b"CNNF"
    u32    version (1)
    u64    record count
    u32    dimension
    then per record: u16 id byte-length, UTF-8 id, dimension * f32

All integers and floats little-endian. Preprocessing follows the
model's published inference convention: RGB, bilinear resize to
224 x 224, scale to [0, 1], normalize with the ImageNet channel
mean/std. Weights are loaded from a local state_dict file; no network
access.
"""

import struct
from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image
from torchvision.models import alexnet

MAGIC = b"CNNF"
VERSION = 1
FEATURE_DIM = 4096
INPUT_SIZE = 224
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)
# index of the second fully connected layer in alexnet().classifier
FC7_INDEX = 4
DEFAULT_BATCH = 16


class ExportError(Exception):
    """Bad manifest, unreadable input, or a network/shape mismatch."""


@dataclass(frozen=True)
class ExportManifest:
    """Ordered (sample_id, image_path) pairs with unique ids."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((str(i), str(p)) for i, p in self.entries)
        if not entries:
            raise ExportError("manifest holds no entries")
        seen = set()
        for sample_id, _ in entries:
            if sample_id in seen:
                raise ExportError("duplicate sample id %r" % (sample_id,))
            seen.add(sample_id)
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)


def read_manifest(path):
    """Parse an id<TAB>path listing; '#' lines and blank lines skipped."""
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ExportError("cannot read manifest %s: %s" % (path, exc))
    entries = []
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ExportError(
                    "%s line %d: expected id<TAB>path" % (path, lineno))
            entries.append((parts[0], parts[1]))
    return ExportManifest(entries)


def load_network(weights_path):
    """AlexNet in eval mode with weights from a local state_dict file."""
    model = alexnet(weights=None)
    try:
        state = torch.load(weights_path, map_location="cpu",
                           weights_only=True)
    except (OSError, RuntimeError, ValueError) as exc:
        raise ExportError(
            "cannot load weights %s: %s" % (weights_path, exc))
    try:
        model.load_state_dict(state)
    except RuntimeError as exc:
        raise ExportError("weights do not fit the network: %s" % (exc,))
    model.eval()
    return model


def preprocess(image_path):
    """One image to a normalized (3, 224, 224) float32 tensor."""
    try:
        with Image.open(image_path) as img:
            rgb = img.convert("RGB").resize(
                (INPUT_SIZE, INPUT_SIZE), Image.BILINEAR)
    except OSError as exc:
        raise ExportError("cannot read image %s: %s" % (image_path, exc))
    arr = np.asarray(rgb, dtype=np.float32) / 255.0
    arr = (arr - np.asarray(IMAGENET_MEAN, dtype=np.float32)) \
        / np.asarray(IMAGENET_STD, dtype=np.float32)
    return torch.from_numpy(arr.transpose(2, 0, 1).copy())


def _penultimate_activations(model, batch):
    """classifier[4] outputs for a batch, captured before the ReLU."""
    captured = []
    layer = model.classifier[FC7_INDEX]
    handle = layer.register_forward_hook(
        lambda mod, inp, out: captured.append(out.detach()))
    try:
        with torch.no_grad():
            model(batch)
    finally:
        handle.remove()
    feats = captured[0]
    if feats.ndim != 2 or feats.shape[1] != FEATURE_DIM:
        raise ExportError(
            "penultimate layer is %s wide, expected %d"
            % (tuple(feats.shape[1:]), FEATURE_DIM))
    return feats.cpu().numpy().astype(np.float32)


def write_records(path, ids, matrix):
    """Write one float32 matrix row per id in order."""
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    if matrix.ndim != 2 or len(ids) != matrix.shape[0]:
        raise ExportError("ids and feature rows disagree")
    if not np.isfinite(matrix).all():
        raise ExportError("non-finite activations; refusing to write")
    try:
        fh = open(path, "wb")
    except OSError as exc:
        raise ExportError("cannot write %s: %s" % (path, exc))
    with fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(ids)))
        fh.write(struct.pack("<I", matrix.shape[1]))
        for sample_id, row in zip(ids, matrix):
            ident = sample_id.encode("utf-8")
            if len(ident) > 0xFFFF:
                raise ExportError("sample id too long: %r" % (sample_id,))
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(row.astype("<f4").tobytes())


def export_features(manifest, weights_path, out_path,
                    batch_size=DEFAULT_BATCH):
    """Run every manifest image through the network and write the file.

    Returns (ids, matrix) as written, in manifest order.
    """
    if batch_size < 1:
        raise ExportError("batch size must be positive")
    model = load_network(weights_path)
    ids = [sample_id for sample_id, _ in manifest.entries]
    rows = []
    for start in range(0, len(manifest), batch_size):
        chunk = manifest.entries[start:start + batch_size]
        batch = torch.stack([preprocess(p) for _, p in chunk])
        rows.append(_penultimate_activations(model, batch))
    matrix = np.vstack(rows)
    write_records(out_path, ids, matrix)
    return ids, matrix
