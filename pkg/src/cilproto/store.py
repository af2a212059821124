"""Embedding sets and the FEB on-disk format.

A FEB directory holds one labeled embedding matrix for one backbone and
one split:

* ``manifest.json`` -- exactly the keys {format_version: 1, num_samples,
  dim, dtype: "f32le", label_dtype: "u32le", backbone_tag, split_tag};
* ``features.bin``  -- row-major num_samples x dim 32-bit little-endian
  IEEE floats;
* ``labels.bin``    -- num_samples 32-bit little-endian unsigned ints.

The format is bit-exact: save -> load -> save reproduces every byte,
including negative zero. In memory, features are promoted to float64
(exact for any f32 value) so downstream math runs in double precision;
arrays are marked read-only so sets can be shared across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .rng import Xoshiro256StarStar

SPLIT_TAGS = ("train", "test")

_MANIFEST_KEYS = {
    "format_version",
    "num_samples",
    "dim",
    "dtype",
    "label_dtype",
    "backbone_tag",
    "split_tag",
}


def _freeze(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.asarray(arr, dtype=dtype)
    if out.flags.writeable:
        out = out.copy()
        out.setflags(write=False)
    return out


def _first_nonfinite(features: np.ndarray) -> tuple[int, int] | None:
    finite = np.isfinite(features)
    if finite.all():
        return None
    flat = int(np.argmin(finite.ravel()))
    return divmod(flat, features.shape[1])


@dataclass(frozen=True)
class EmbeddingSet:
    """Immutable labeled matrix of backbone feature vectors for one split."""

    features: np.ndarray
    labels: np.ndarray
    backbone_tag: str = ""
    split_tag: str = "train"

    def __post_init__(self):
        feats = _freeze(self.features, np.float64)
        labels = _freeze(self.labels, np.int64)
        if feats.ndim != 2:
            raise DataError(f"features must be 2-d, got {feats.ndim}-d")
        if feats.shape[1] < 1:
            raise DataError("degenerate dimension: embedding width must be >= 1")
        if labels.ndim != 1:
            raise DataError(f"labels must be 1-d, got {labels.ndim}-d")
        if len(labels) != feats.shape[0]:
            raise DataError(
                f"label count mismatch: {len(labels)} labels for {feats.shape[0]} samples"
            )
        bad = _first_nonfinite(feats)
        if bad is not None:
            raise DataError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        if len(labels) and labels.min() < 0:
            idx = int(np.argmin(labels >= 0))
            raise DataError(f"negative label at record {idx}")
        if self.split_tag not in SPLIT_TAGS:
            raise ConfigError(f"split_tag must be one of {SPLIT_TAGS}, got {self.split_tag!r}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def load_embedding_set(path: str | Path, num_classes: int | None = None) -> EmbeddingSet:
    """Load and validate a FEB directory.

    When `num_classes` is given every label is checked against it;
    violations are reported with record index and byte offset.
    """
    root = Path(path)
    manifest_path = root / "manifest.json"
    features_path = root / "features.bin"
    labels_path = root / "labels.bin"
    for p in (manifest_path, features_path, labels_path):
        if not p.is_file():
            raise DataError(f"missing file: {p}")

    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed manifest {manifest_path}: {exc}") from exc
    if not isinstance(manifest, dict):
        raise DataError(f"malformed manifest {manifest_path}: expected an object")
    unknown = set(manifest) - _MANIFEST_KEYS
    if unknown:
        raise DataError(f"unknown manifest keys {sorted(unknown)} in {manifest_path}")
    missing = _MANIFEST_KEYS - set(manifest)
    if missing:
        raise DataError(f"manifest missing keys {sorted(missing)} in {manifest_path}")
    if manifest["format_version"] != 1:
        raise DataError(f"unsupported format_version {manifest['format_version']!r}")
    if manifest["dtype"] != "f32le" or manifest["label_dtype"] != "u32le":
        raise DataError(
            f"unsupported dtypes {manifest['dtype']!r}/{manifest['label_dtype']!r}"
        )
    n, dim = manifest["num_samples"], manifest["dim"]
    if not (isinstance(n, int) and n >= 0 and isinstance(dim, int) and dim >= 1):
        raise DataError(f"bad manifest geometry: num_samples={n!r}, dim={dim!r}")

    raw_features = features_path.read_bytes()
    expected = n * dim * 4
    if len(raw_features) != expected:
        raise DataError(
            f"data length mismatch: features.bin is {len(raw_features)} bytes, "
            f"expected {expected} ({n} samples x {dim} dims x 4 bytes)"
        )
    raw_labels = labels_path.read_bytes()
    if len(raw_labels) != n * 4:
        raise DataError(
            f"data length mismatch: labels.bin is {len(raw_labels)} bytes, "
            f"expected {n * 4} ({n} samples x 4 bytes)"
        )

    feats32 = np.frombuffer(raw_features, dtype="<f4").reshape(n, dim)
    feats = feats32.astype(np.float64)
    bad = _first_nonfinite(feats) if n else None
    if bad is not None:
        offset = (bad[0] * dim + bad[1]) * 4
        raise DataError(
            f"non-finite value at row {bad[0]}, column {bad[1]} (byte offset {offset})"
        )
    labels = np.frombuffer(raw_labels, dtype="<u4").astype(np.int64)
    if num_classes is not None and n and labels.max() >= num_classes:
        idx = int(np.argmax(labels >= num_classes))
        raise DataError(
            f"label out of range at record {idx}: {labels[idx]} >= {num_classes} "
            f"(byte offset {idx * 4})"
        )
    feats.setflags(write=False)
    labels.setflags(write=False)
    return EmbeddingSet(
        features=feats,
        labels=labels,
        backbone_tag=manifest["backbone_tag"],
        split_tag=manifest["split_tag"],
    )


def save_embedding_set(es: EmbeddingSet, path: str | Path) -> None:
    """Write `es` as a FEB directory (created if absent)."""
    if len(es.labels) and es.labels.max() >= 1 << 32:
        raise DataError(f"label {es.labels.max()} does not fit in u32")
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": 1,
        "num_samples": es.num_samples,
        "dim": es.dim,
        "dtype": "f32le",
        "label_dtype": "u32le",
        "backbone_tag": es.backbone_tag,
        "split_tag": es.split_tag,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (root / "features.bin").write_bytes(es.features.astype("<f4").tobytes())
    (root / "labels.bin").write_bytes(es.labels.astype("<u4").tobytes())


def concat_features(a: EmbeddingSet, b: EmbeddingSet) -> EmbeddingSet:
    """Row-wise concatenation, a's columns first; labels must align."""
    if a.num_samples != b.num_samples:
        raise DataError(
            f"sample count mismatch: {a.num_samples} vs {b.num_samples}"
        )
    if not np.array_equal(a.labels, b.labels):
        idx = int(np.argmax(a.labels != b.labels))
        raise DataError(
            f"label mismatch at record {idx}: {a.labels[idx]} vs {b.labels[idx]}"
        )
    feats = np.concatenate([a.features, b.features], axis=1)
    feats.setflags(write=False)
    tag = f"{a.backbone_tag}+{b.backbone_tag}"
    return EmbeddingSet(feats, a.labels, backbone_tag=tag, split_tag=a.split_tag)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the synthetic Gaussian embedding generator.

    Class c's mean vector is `mean_scale` on channel (c mod dim) and zero
    elsewhere, so with num_classes <= dim the first num_classes channels
    are exactly the discriminative ones and the rest carry pure noise.
    """

    num_classes: int
    samples_per_class: int
    dim: int
    mean_scale: float = 1.0
    noise_scale: float = 0.2
    channel_scale: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 1 or self.samples_per_class < 1 or self.dim < 1:
            raise ConfigError("num_classes, samples_per_class, and dim must all be >= 1")
        if not (self.noise_scale > 0):
            raise ConfigError(f"noise scale must be > 0, got {self.noise_scale}")
        if not math.isfinite(self.mean_scale):
            raise ConfigError("mean_scale must be finite")
        if self.channel_scale is not None:
            scale = tuple(float(v) for v in self.channel_scale)
            if len(scale) != self.dim:
                raise ConfigError(
                    f"channel_scale has {len(scale)} entries, expected dim={self.dim}"
                )
            if not all(math.isfinite(v) for v in scale):
                raise ConfigError("channel_scale entries must be finite")
            object.__setattr__(self, "channel_scale", scale)


def synth_gaussian_set(spec: SynthSpec, split_tag: str) -> EmbeddingSet:
    """Generate a deterministic synthetic embedding set.

    Sample value = |(mean_c[ch] + noise) * channel_scale[ch]| with noise
    drawn N(0, noise_scale^2) from the stream named after `split_tag`
    (train and test share means, differ in noise). Draw order is
    class-major, then sample, then channel. Values are quantized through
    float32 so in-memory sets match their FEB round trip bit for bit.
    """
    if split_tag not in SPLIT_TAGS:
        raise ConfigError(f"split_tag must be one of {SPLIT_TAGS}, got {split_tag!r}")
    rng = Xoshiro256StarStar.from_seed(spec.seed, stream=split_tag)
    scale = spec.channel_scale if spec.channel_scale is not None else (1.0,) * spec.dim
    n = spec.num_classes * spec.samples_per_class
    feats = np.empty((n, spec.dim), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    row = 0
    for c in range(spec.num_classes):
        mean_channel = c % spec.dim
        for _ in range(spec.samples_per_class):
            for ch in range(spec.dim):
                mean = spec.mean_scale if ch == mean_channel else 0.0
                value = abs((mean + rng.normal() * spec.noise_scale) * scale[ch])
                feats[row, ch] = value
            labels[row] = c
            row += 1
    feats = feats.astype(np.float32).astype(np.float64)
    feats.setflags(write=False)
    labels.setflags(write=False)
    return EmbeddingSet(
        feats, labels, backbone_tag=f"synth:{spec.seed}", split_tag=split_tag
    )
