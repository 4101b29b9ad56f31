"""Multi-view datasets: synthetic generation, CSV/JSON-manifest loading,
Gaussian noise injection and stratified splits."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .dirichlet import DimensionError


class ManifestError(ValueError):
    """Base class for dataset ingestion failures."""


class MissingFileError(ManifestError):
    pass


class RaggedRowError(ManifestError):
    pass


class RowCountMismatchError(ManifestError):
    pass


class NonNumericCellError(ManifestError):
    pass


class LabelRangeError(ManifestError):
    pass


class StratificationError(ValueError):
    pass


@dataclass(frozen=True)
class MultiViewDataset:
    views: list[np.ndarray]
    labels: np.ndarray
    num_classes: int
    sample_ids: np.ndarray | None = None

    def __post_init__(self):
        views = [np.asarray(v, dtype=float) for v in self.views]
        labels = np.asarray(self.labels, dtype=int)
        if not views:
            raise DimensionError("dataset needs at least one view")
        n = labels.shape[0]
        if n < 1:
            raise DimensionError("dataset needs at least one sample")
        for i, v in enumerate(views):
            if v.ndim != 2 or v.shape[0] != n:
                raise DimensionError(f"view {i} has shape {v.shape}, expected ({n}, d)")
        if np.any((labels < 0) | (labels >= self.num_classes)):
            raise LabelRangeError(f"labels must lie in [0, {self.num_classes})")
        ids = np.arange(n) if self.sample_ids is None else np.asarray(self.sample_ids, dtype=int)
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sample_ids", ids)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def num_views(self) -> int:
        return len(self.views)

    @property
    def view_dims(self) -> list[int]:
        return [v.shape[1] for v in self.views]

    def subset(self, rows) -> "MultiViewDataset":
        rows = np.asarray(rows, dtype=int)
        return MultiViewDataset([v[rows] for v in self.views], self.labels[rows],
                                self.num_classes, self.sample_ids[rows])


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian class clusters per view.

    ``center_groups[m][c]`` names the center that class ``c`` uses in view
    ``m``; classes sharing a group are indistinguishable in that view. By
    default every class has its own center.
    """

    num_classes: int = 3
    dims: tuple[int, ...] = (4, 4)
    separation: tuple[float, ...] = (2.0, 2.0)
    sigma: tuple[float, ...] = (1.0, 1.0)
    samples_per_class: int = 100
    seed: int = 0
    center_groups: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        m = len(self.dims)
        if len(self.separation) != m or len(self.sigma) != m:
            raise ValueError("dims, separation and sigma need one entry per view")
        if self.num_classes < 2 or self.samples_per_class < 1 or min(self.dims) < 1:
            raise ValueError("num_classes >= 2, samples_per_class >= 1, dims >= 1 required")
        if min(self.separation) <= 0 or min(self.sigma) < 0:
            raise ValueError("separation must be > 0 and sigma >= 0")
        if self.center_groups is not None:
            if len(self.center_groups) != m or any(len(g) != self.num_classes for g in self.center_groups):
                raise ValueError("center_groups needs one class->group map per view")

    @property
    def num_views(self) -> int:
        return len(self.dims)


def generate_synthetic(spec: SyntheticSpec) -> MultiViewDataset:
    rng = np.random.default_rng(spec.seed)
    k = spec.num_classes
    labels = np.repeat(np.arange(k), spec.samples_per_class)
    views = []
    for m in range(spec.num_views):
        groups = spec.center_groups[m] if spec.center_groups else tuple(range(k))
        n_groups = max(groups) + 1
        centers = rng.normal(size=(n_groups, spec.dims[m]))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        centers *= spec.separation[m]
        noise = rng.normal(size=(labels.size, spec.dims[m]))
        views.append(centers[np.asarray(groups)[labels]] + spec.sigma[m] * noise)
    return MultiViewDataset(views, labels, k)


def complementary_spec(samples_per_class: int = 100, seed: int = 0, dim: int = 8,
                       separation: float = 1.0, sigma: float = 0.25) -> SyntheticSpec:
    """Three classes, two views: view 0 tells class 0 from class 1 only
    (class 2 shares class 1's center), view 1 tells class 1 from class 2 only
    (class 0 shares class 1's center)."""
    return SyntheticSpec(
        num_classes=3,
        dims=(dim, dim),
        separation=(separation, separation),
        sigma=(sigma, sigma),
        samples_per_class=samples_per_class,
        seed=seed,
        center_groups=((0, 1, 1), (0, 0, 1)),
    )


def inject_noise(ds: MultiViewDataset, view: int | None, sigma: float, seed: int) -> MultiViewDataset:
    """Add N(0, sigma^2) to one view (or to every view when ``view`` is None)."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    targets = range(ds.num_views) if view is None else [view]
    for v in targets:
        if not 0 <= v < ds.num_views:
            raise DimensionError(f"view {v} out of range for {ds.num_views} views")
    rng = np.random.default_rng(seed)
    views = [x.copy() for x in ds.views]
    if sigma > 0:
        for v in targets:
            views[v] = views[v] + sigma * rng.standard_normal(views[v].shape)
    return MultiViewDataset(views, ds.labels.copy(), ds.num_classes, ds.sample_ids.copy())


def split(ds: MultiViewDataset, test_fraction: float, seed: int):
    """Seeded stratified split into ``(train, test)``."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    test_rows = []
    for c in range(ds.num_classes):
        rows = np.flatnonzero(ds.labels == c)
        if rows.size == 0:
            continue
        if rows.size < 2:
            raise StratificationError(f"class {c} has {rows.size} sample; need >= 2 to stratify")
        n_test = int(round(test_fraction * rows.size))
        test_rows.append(rng.permutation(rows)[:n_test])
    test = np.sort(np.concatenate(test_rows)) if test_rows else np.array([], dtype=int)
    train = np.setdiff1d(np.arange(ds.n), test)
    return ds.subset(train), ds.subset(test)


def _read_csv(path: str, header: bool) -> list[list[str]]:
    if not os.path.exists(path):
        raise MissingFileError(f"file not found: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    return rows[1:] if header else rows


def _parse_view(path: str) -> np.ndarray:
    rows = _read_csv(path, header=True)
    if not rows:
        raise RaggedRowError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRowError(f"{path}: data row {i + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell.strip())
            except ValueError:
                raise NonNumericCellError(f"{path}: data row {i + 1}, column {j + 1}: {cell!r} is not a number") from None
    return out


def _parse_labels(path: str) -> np.ndarray:
    rows = _read_csv(path, header=False)
    out = []
    for i, row in enumerate(rows):
        cell = row[0].strip()
        try:
            out.append(int(cell))
        except ValueError:
            if i == 0:  # tolerate a header line
                continue
            raise NonNumericCellError(f"{path}: row {i + 1}: {cell!r} is not an integer label") from None
    return np.asarray(out, dtype=int)


def load_manifest(path, num_classes: int | None = None) -> MultiViewDataset:
    """Load ``{"views": [...csv], "labels": "y.csv"}``; paths are relative
    to the manifest. ``num_classes`` defaults to the manifest's
    ``"num_classes"`` field, else the number of distinct labels."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise MissingFileError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(manifest.get("views"), list) or not manifest["views"] or "labels" not in manifest:
        raise ManifestError(f"{path}: manifest needs a non-empty 'views' list and a 'labels' entry")
    base = os.path.dirname(os.path.abspath(path))
    view_paths = [os.path.join(base, v) for v in manifest["views"]]
    label_path = os.path.join(base, manifest["labels"])
    views = [_parse_view(p) for p in view_paths]
    labels = _parse_labels(label_path)
    counts = [(p, v.shape[0]) for p, v in zip(view_paths, views)] + [(label_path, labels.size)]
    for p, n in counts[1:]:
        if n != counts[0][1]:
            raise RowCountMismatchError(
                f"row-count mismatch: {counts[0][0]} has {counts[0][1]} rows, {p} has {n}"
            )
    k = num_classes or manifest.get("num_classes") or len(np.unique(labels))
    bad = labels[(labels < 0) | (labels >= k)]
    if bad.size:
        raise LabelRangeError(f"{label_path}: label {int(bad[0])} outside [0, {k})")
    return MultiViewDataset(views, labels, int(k))


def save_manifest(ds: MultiViewDataset, directory, prefix: str = "view") -> str:
    """Write a dataset as CSVs plus a manifest; returns the manifest path."""
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    names = []
    for i, v in enumerate(ds.views):
        name = f"{prefix}{i + 1}.csv"
        with open(os.path.join(directory, name), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"f{j}" for j in range(v.shape[1])])
            w.writerows([[repr(float(x)) for x in row] for row in v])
        names.append(name)
    with open(os.path.join(directory, "labels.csv"), "w", encoding="utf-8") as fh:
        fh.write("".join(f"{int(y)}\n" for y in ds.labels))
    manifest = os.path.join(directory, "manifest.json")
    with open(manifest, "w", encoding="utf-8") as fh:
        json.dump({"views": names, "labels": "labels.csv", "num_classes": ds.num_classes}, fh, indent=2)
    return manifest
