"""Digit-image dataset handling.

Loads IDX and CSV containers, normalizes features into [0, 1], produces the
disjoint training splits the transferability studies need, and generates a
deterministic synthetic stand-in (Gaussian blobs in [0, 1]^64) so everything
runs without downloads. Real MNIST files are optional: point the IDX loader
at them and the rest of the toolkit does not care.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal

import numpy as np

from .errors import DataConsistencyError, DataFormatError, DataSizeError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

# mirrors the upstream 8-decimal truncation applied when exporting pixel CSVs
CSV_DECIMALS = 8
_CSV_QUANTUM = Decimal(1).scaleb(-CSV_DECIMALS)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix in [0, 1]^d plus integer class labels.

    ``X`` is (n, d) float64, ``y`` is (n,) int64 with values in
    0..num_classes-1. Instances are immutable and safe to share across threads.
    """

    X: np.ndarray
    y: np.ndarray
    num_classes: int

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise DataConsistencyError(f"feature matrix must be 2-d, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataConsistencyError(
                f"label count {y.shape} does not match sample count {X.shape[0]}"
            )
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise DataConsistencyError("features must lie in [0, 1] after normalization")
        if y.size and (y.min() < 0 or y.max() >= self.num_classes):
            raise DataConsistencyError(
                f"labels must lie in 0..{self.num_classes - 1}, got range "
                f"[{y.min()}, {y.max()}]"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def subset(self, indices) -> "Dataset":
        return Dataset(self.X[indices], self.y[indices], self.num_classes)

    def head(self, n: int) -> "Dataset":
        return self.subset(np.arange(min(n, len(self))))


def _read_be_u32(buf: bytes, offset: int, path: str) -> int:
    if offset + 4 > len(buf):
        raise DataFormatError(f"{path}: truncated IDX header")
    return struct.unpack_from(">I", buf, offset)[0]


def load_idx(images_path, labels_path, num_classes: int | None = None) -> Dataset:
    """Load an IDX image/label file pair into a normalized Dataset.

    Pixel bytes 0..255 are mapped to [0, 1] by division by 255; sample order is
    preserved. Raises DataFormatError on magic mismatch and
    DataConsistencyError when the image and label counts disagree.
    """
    with open(images_path, "rb") as fh:
        raw = fh.read()
    magic = _read_be_u32(raw, 0, str(images_path))
    if magic != IDX_IMAGE_MAGIC:
        raise DataFormatError(
            f"{images_path}: bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}"
        )
    count = _read_be_u32(raw, 4, str(images_path))
    rows = _read_be_u32(raw, 8, str(images_path))
    cols = _read_be_u32(raw, 12, str(images_path))
    expected = count * rows * cols
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=16)
    if pixels.size != expected:
        raise DataFormatError(
            f"{images_path}: expected {expected} pixel bytes, found {pixels.size}"
        )

    with open(labels_path, "rb") as fh:
        raw = fh.read()
    magic = _read_be_u32(raw, 0, str(labels_path))
    if magic != IDX_LABEL_MAGIC:
        raise DataFormatError(
            f"{labels_path}: bad label magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}"
        )
    label_count = _read_be_u32(raw, 4, str(labels_path))
    labels = np.frombuffer(raw, dtype=np.uint8, offset=8)
    if labels.size != label_count:
        raise DataFormatError(
            f"{labels_path}: expected {label_count} label bytes, found {labels.size}"
        )
    if label_count != count:
        raise DataConsistencyError(
            f"image count {count} does not match label count {label_count}"
        )

    X = pixels.astype(np.float64).reshape(count, rows * cols) / 255.0
    y = labels.astype(np.int64)
    if num_classes is None:
        num_classes = int(y.max()) + 1 if count else 0
    return Dataset(X, y, num_classes)


def _truncate_cell(value: float) -> str:
    # Decimal(repr(v)) keeps the shortest round-trip text, so re-truncating an
    # already 8-decimal value is a no-op and save->load->save is byte stable.
    return str(Decimal(repr(float(value))).quantize(_CSV_QUANTUM, rounding=ROUND_DOWN))


def save_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Write a Dataset as CSV with a header row, truncating to 8 decimals."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(dataset.dim)] + [label_column])
        for row, label in zip(dataset.X, dataset.y):
            writer.writerow([_truncate_cell(v) for v in row] + [int(label)])


def load_csv(path, label_column: str = "label", num_classes: int | None = None) -> Dataset:
    """Load a header-row CSV, clipping features into [0, 1].

    The label column is located by name and must hold integer values; ragged
    rows and non-numeric cells raise DataFormatError.
    """
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty CSV") from None
        if label_column not in header:
            raise DataFormatError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
        width = len(header)

        features, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width:
                raise DataFormatError(
                    f"{path}:{lineno}: ragged row ({len(row)} cells, header has {width})"
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
            label = values.pop(label_idx)
            if label != int(label):
                raise DataFormatError(f"{path}:{lineno}: non-integer label {label!r}")
            features.append(values)
            labels.append(int(label))

    X = np.clip(np.asarray(features, dtype=np.float64).reshape(len(labels), width - 1), 0.0, 1.0)
    y = np.asarray(labels, dtype=np.int64)
    if num_classes is None:
        num_classes = int(y.max()) + 1 if y.size else 0
    return Dataset(X, y, num_classes)


def split_disjoint(dataset: Dataset, part_size: int, num_parts: int) -> list[Dataset]:
    """Split into `num_parts` disjoint contiguous parts in order of increasing index.

    Part i holds samples [i*part_size, (i+1)*part_size); trailing samples are
    left unused. Raises DataSizeError when the dataset is too small.
    """
    needed = part_size * num_parts
    if needed > len(dataset):
        raise DataSizeError(
            f"need {needed} samples for {num_parts} parts of {part_size}, have {len(dataset)}"
        )
    return [
        dataset.subset(np.arange(i * part_size, (i + 1) * part_size))
        for i in range(num_parts)
    ]


def synthetic_digits(
    train_size: int,
    test_size: int,
    dim: int = 64,
    num_classes: int = 10,
    seed: int = 7,
    spread: float = 0.14,
    center_low: float = 0.2,
    center_high: float = 0.8,
) -> tuple[Dataset, Dataset]:
    """Deterministic Gaussian-blob fixture: one cluster per class in [0, 1]^dim.

    Class centers are drawn once from the seeded generator, then train and test
    points are sampled around them (round-robin over classes so every class is
    populated) and clipped into the unit box. Same seed -> identical datasets.
    """
    rng = np.random.default_rng(seed)
    centers = rng.uniform(center_low, center_high, size=(num_classes, dim))

    def sample(n: int) -> Dataset:
        y = np.arange(n, dtype=np.int64) % num_classes
        y = rng.permutation(y)
        X = centers[y] + rng.normal(0.0, spread, size=(n, dim))
        return Dataset(np.clip(X, 0.0, 1.0), y, num_classes)

    return sample(train_size), sample(test_size)
