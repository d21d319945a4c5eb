"""Subgraph-signature classifiers.

The pipeline only needs a hard label for each canonical adjacency image, so
any object with a ``predict_label(img, salt=0)`` method and a ``lens_size``
attribute can serve as a per-size classifier. Two implementations live here:

  * CentroidModel: nearest centroid over flattened bit vectors, one model per
    lens size, trained on homogeneous corpora. Cheap to train, O(C) to
    predict, and a reasonable stand-in for a learned image classifier.
  * RandomLabelClassifier: ignores the image and emits a seeded uniform
    label. Used to calibrate the rest of the pipeline (a random classifier
    must score 1/C end to end).

The ``salt`` argument carries a per-call seed derived by the caller;
deterministic classifiers ignore it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .embedding import BitImage
from .seeds import mix64

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ClassCatalog:
    """Ordered, immutable list of class names; index order is fixed for a run."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.names) < 2:
            raise ValueError("a class catalog needs at least 2 classes")
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")
        for name in self.names:
            if not name or name != name.strip():
                raise ValueError(f"bad class name: {name!r}")
            if any(ch in name for ch in ",\t\n/"):
                raise ValueError(f"class name {name!r} contains a reserved character")

    def __len__(self) -> int:
        return len(self.names)

    def __getitem__(self, index: int) -> str:
        return self.names[index]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown class name: {name!r}") from None


@dataclass(frozen=True)
class CentroidModel:
    """Per-class mean bit vectors for one lens size.

    means has shape (C, lens_size**2) with entries in [0, 1]; counts holds
    the number of training samples behind each class mean.
    """

    lens_size: int
    catalog: ClassCatalog
    means: np.ndarray
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        expected = (len(self.catalog), self.lens_size * self.lens_size)
        if self.means.shape != expected:
            raise ValueError(f"means shape {self.means.shape} != {expected}")
        if len(self.counts) != len(self.catalog):
            raise ValueError("one sample count per catalog class required")

    def predict_label(self, img: BitImage, salt: int = 0) -> int:
        """Class index with the nearest centroid (squared Euclidean distance).

        Ties go to the lowest class index. salt is accepted for interface
        compatibility and ignored.
        """
        if img.n != self.lens_size:
            raise ValueError(f"image side {img.n} != model lens size {self.lens_size}")
        x = img.bits.reshape(-1).astype(np.float64)
        diffs = self.means - x
        dists = np.einsum("ij,ij->i", diffs, diffs)
        return int(np.argmin(dists))


def train_centroid_model(samples: list[tuple[BitImage, int]], lens_size: int,
                         catalog: ClassCatalog) -> CentroidModel:
    """Arithmetic mean of flattened bit vectors per class.

    Every catalog class must contribute at least one sample and every sample
    image must have side lens_size.
    """
    c = len(catalog)
    sums = np.zeros((c, lens_size * lens_size), dtype=np.float64)
    counts = [0] * c
    for img, label in samples:
        if img.n != lens_size:
            raise ValueError(f"sample image side {img.n} != lens size {lens_size}")
        if not 0 <= label < c:
            raise ValueError(f"class index {label} outside catalog of size {c}")
        sums[label] += img.bits.reshape(-1)
        counts[label] += 1
    for j, n in enumerate(counts):
        if n == 0:
            raise ValueError(f"class {catalog[j]!r} has no training samples")
    means = sums / np.asarray(counts, dtype=np.float64)[:, None]
    return CentroidModel(lens_size=lens_size, catalog=catalog, means=means,
                         counts=tuple(counts))


@dataclass(frozen=True)
class RandomLabelClassifier:
    """Seeded uniform-random labels, independent of the image.

    predict_label(img, salt) returns mix64(seed, salt) mod C, so the label
    depends only on (seed, salt) and never on scheduling. Calibration baseline
    for pipeline tests.
    """

    lens_size: int
    class_count: int
    seed: int = 0

    def predict_label(self, img: BitImage, salt: int = 0) -> int:
        if img.n != self.lens_size:
            raise ValueError(f"image side {img.n} != lens size {self.lens_size}")
        return mix64(self.seed, salt) % self.class_count


def save_model(model: CentroidModel, path: str) -> None:
    """Write the versioned plain-text model format (.nlm).

    Header lines carry the catalog and lens size; one decimal-vector line per
    class with 6 significant digits.
    """
    lines = [f"nlm {MODEL_FORMAT_VERSION}",
             f"lens_size {model.lens_size}",
             f"class_count {len(model.catalog)}"]
    for j, name in enumerate(model.catalog.names):
        lines.append(f"class {model.counts[j]} {name}")
    for j in range(len(model.catalog)):
        lines.append(" ".join(f"{v:.6g}" for v in model.means[j]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path: str) -> CentroidModel:
    """Read a model written by save_model."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("nlm "):
        raise ValueError(f"{path}: not a model file (missing 'nlm' header)")
    version = int(lines[0].split()[1])
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model format version {version}")
    lens_size = int(_header_value(lines[1], "lens_size", path))
    class_count = int(_header_value(lines[2], "class_count", path))
    names = []
    counts = []
    for ln in lines[3:3 + class_count]:
        head, count_str, name = ln.split(" ", 2)
        if head != "class":
            raise ValueError(f"{path}: expected a 'class' line, got {ln!r}")
        counts.append(int(count_str))
        names.append(name)
    rows = lines[3 + class_count:3 + 2 * class_count]
    if len(rows) != class_count:
        raise ValueError(f"{path}: truncated mean vectors")
    means = np.asarray([[float(t) for t in row.split()] for row in rows],
                       dtype=np.float64)
    return CentroidModel(lens_size=lens_size, catalog=ClassCatalog(tuple(names)),
                         means=means, counts=tuple(counts))


def _header_value(line: str, key: str, path: str) -> str:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise ValueError(f"{path}: expected '{key} <value>', got {line!r}")
    return parts[1]


def train_models_from_corpus(corpus: dict[str, dict[int, list[BitImage]]],
                             catalog: ClassCatalog,
                             sizes: tuple[int, ...]) -> dict[int, CentroidModel]:
    """One centroid model per lens size from a loaded PBM corpus."""
    models: dict[int, CentroidModel] = {}
    for size in sizes:
        samples: list[tuple[BitImage, int]] = []
        for j, name in enumerate(catalog.names):
            for img in corpus.get(name, {}).get(size, []):
                samples.append((img, j))
        models[size] = train_centroid_model(samples, size, catalog)
    return models


def save_models(models: dict[int, CentroidModel], out_dir: str) -> list[str]:
    """Write one .nlm file per lens size under out_dir; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for size in sorted(models):
        path = os.path.join(out_dir, f"size_{size}.nlm")
        save_model(models[size], path)
        paths.append(path)
    return paths


def load_models(model_dir: str) -> dict[int, CentroidModel]:
    """Read every size_<n>.nlm under model_dir, keyed by lens size."""
    models: dict[int, CentroidModel] = {}
    for entry in sorted(os.listdir(model_dir)):
        if entry.startswith("size_") and entry.endswith(".nlm"):
            model = load_model(os.path.join(model_dir, entry))
            models[model.lens_size] = model
    if not models:
        raise ValueError(f"no size_<n>.nlm model files found in {model_dir}")
    catalogs = {m.catalog.names for m in models.values()}
    if len(catalogs) != 1:
        raise ValueError("model files disagree on the class catalog")
    return models
