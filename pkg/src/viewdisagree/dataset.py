"""Synthetic multi-view data: generation, disagreement injection, seed splits, JSONL I/O.

Labels are plain integers: ``BACKGROUND == 0`` and foreground class ``c`` is ``c``
for ``c`` in ``1..n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ._rng import make_rng, sub_seed
from .errors import ConfigError, DatasetFormatError, InsufficientSamplesError

BACKGROUND = 0


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def label_name(label: int) -> str:
    return "background" if label == BACKGROUND else f"class{label}"


@dataclass(frozen=True)
class MultiViewSample:
    views: tuple[np.ndarray, ...]
    true_view_labels: tuple[int, ...]
    nominal_label: int

    def __post_init__(self):
        if len(self.views) != len(self.true_view_labels):
            raise ValueError("views and true_view_labels differ in length")
        if self.nominal_label == BACKGROUND and any(t != BACKGROUND for t in self.true_view_labels):
            raise ValueError("a background sample must be background in every view")

    @property
    def is_redundant(self) -> bool:
        return all(t == self.nominal_label for t in self.true_view_labels)


@dataclass(eq=False)
class SampleBlock:
    """A column-oriented batch of multi-view samples.

    ``views[i]`` has shape ``(M, d_i)``; ``true_view_labels`` is ``(M, V)``;
    ``nominal`` is ``(M,)``.
    """

    views: list[np.ndarray]
    true_view_labels: np.ndarray
    nominal: np.ndarray

    def __post_init__(self):
        self.views = [np.asarray(v, dtype=float) for v in self.views]
        self.true_view_labels = np.asarray(self.true_view_labels, dtype=np.int64).reshape(-1, len(self.views))
        self.nominal = np.asarray(self.nominal, dtype=np.int64).reshape(-1)
        m = len(self.nominal)
        if self.true_view_labels.shape[0] != m or any(v.shape[0] != m for v in self.views):
            raise ValueError("inconsistent sample counts across block fields")

    @classmethod
    def empty(cls, dims: Sequence[int]) -> SampleBlock:
        return cls([np.zeros((0, d)) for d in dims], np.zeros((0, len(dims)), dtype=np.int64), np.zeros(0, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.nominal)

    def __getitem__(self, k: int) -> MultiViewSample:
        return MultiViewSample(
            tuple(v[k] for v in self.views),
            tuple(int(t) for t in self.true_view_labels[k]),
            int(self.nominal[k]),
        )

    def take(self, idx) -> SampleBlock:
        idx = np.asarray(idx, dtype=np.int64)
        return SampleBlock([v[idx] for v in self.views], self.true_view_labels[idx], self.nominal[idx])

    def concat(self, other: SampleBlock) -> SampleBlock:
        return SampleBlock(
            [np.concatenate([a, b]) for a, b in zip(self.views, other.views)],
            np.concatenate([self.true_view_labels, other.true_view_labels]),
            np.concatenate([self.nominal, other.nominal]),
        )

    def copy(self) -> SampleBlock:
        return SampleBlock([v.copy() for v in self.views], self.true_view_labels.copy(), self.nominal.copy())

    def redundant(self) -> np.ndarray:
        """Boolean mask of samples whose every view shows the nominal class."""
        return np.all(self.true_view_labels == self.nominal[:, None], axis=1)

    def equals(self, other: SampleBlock) -> bool:
        return (
            len(self.views) == len(other.views)
            and all(np.array_equal(a, b) for a, b in zip(self.views, other.views))
            and np.array_equal(self.true_view_labels, other.true_view_labels)
            and np.array_equal(self.nominal, other.nominal)
        )


@dataclass(eq=False)
class MultiViewDataset:
    dims: tuple[int, ...]
    n_classes: int
    unlabeled: SampleBlock
    test: SampleBlock
    seed: SampleBlock = None
    unlabeled_mask: np.ndarray = None
    background_mean: list[np.ndarray] | None = None
    background_std: float = 1.0

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if self.seed is None:
            self.seed = SampleBlock.empty(self.dims)
        if self.unlabeled_mask is None:
            self.unlabeled_mask = np.ones((len(self.unlabeled), self.V), dtype=bool)
        self.unlabeled_mask = np.asarray(self.unlabeled_mask, dtype=bool)
        for block in (self.unlabeled, self.test, self.seed):
            if len(block.views) != self.V:
                raise ValueError(f"block has {len(block.views)} views, dataset has {self.V}")
            for v, d in zip(block.views, self.dims):
                if v.shape[1] != d:
                    raise ValueError(f"view dimensionality {v.shape[1]} != declared {d}")
        if self.unlabeled_mask.shape != (len(self.unlabeled), self.V):
            raise ValueError("unlabeled_mask shape does not match the unlabeled pool")

    @property
    def V(self) -> int:
        return len(self.dims)

    @property
    def seed_sets(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per-view labeled seed set S_i as ``(X, y)``."""
        return [(self.seed.views[i], self.seed.true_view_labels[:, i]) for i in range(self.V)]

    def __eq__(self, other):
        if not isinstance(other, MultiViewDataset):
            return NotImplemented
        bg_equal = (self.background_mean is None) == (other.background_mean is None)
        if bg_equal and self.background_mean is not None:
            bg_equal = all(np.array_equal(a, b) for a, b in zip(self.background_mean, other.background_mean))
        return (
            self.dims == other.dims
            and self.n_classes == other.n_classes
            and self.unlabeled.equals(other.unlabeled)
            and self.test.equals(other.test)
            and self.seed.equals(other.seed)
            and np.array_equal(self.unlabeled_mask, other.unlabeled_mask)
            and bg_equal
            and self.background_std == other.background_std
        )

    def summary(self) -> dict:
        nominal = self.unlabeled.nominal
        corrupted = int(np.sum(~self.unlabeled.redundant()))
        counts = {label_name(c): int(np.sum(nominal == c)) for c in range(self.n_classes + 1)}
        return {
            "V": self.V,
            "unlabeled": len(self.unlabeled),
            "seed": len(self.seed),
            "test": len(self.test),
            "class_counts": counts,
            "disagreement": corrupted,
        }


@dataclass
class SyntheticConfig:
    n_foreground_classes: int = 2
    per_class_count: int = 150
    test_per_class: int = 50
    dims: tuple[int, ...] = (2, 2)
    class_means: list | None = None  # [view][class-1] -> mean vector; default 4c per coordinate
    class_std: float = 1.0
    background_mean: list | None = None  # [view] -> mean vector; default origin
    background_std: float = 1.0
    disagreement_rate: float = 0.0
    redundant_background: bool = True
    rng_seed: int = 0

    def resolved_class_means(self) -> list[np.ndarray]:
        if self.class_means is None:
            return [
                np.array([[4.0 * c] * d for c in range(1, self.n_foreground_classes + 1)]) for d in self.dims
            ]
        return [np.asarray(m, dtype=float).reshape(self.n_foreground_classes, d) for m, d in zip(self.class_means, self.dims)]

    def resolved_background_mean(self) -> list[np.ndarray]:
        if self.background_mean is None:
            return [np.zeros(d) for d in self.dims]
        return [np.asarray(m, dtype=float).reshape(d) for m, d in zip(self.background_mean, self.dims)]

    def validate(self) -> None:
        if int(self.n_foreground_classes) < 2:
            raise ConfigError("n_foreground_classes", "must be >= 2")
        if int(self.per_class_count) < 1:
            raise ConfigError("per_class_count", "must be positive")
        if int(self.test_per_class) < 0:
            raise ConfigError("test_per_class", "must be non-negative")
        if len(self.dims) < 2 or any(int(d) < 1 for d in self.dims):
            raise ConfigError("dims", "need at least two views of positive dimensionality")
        if not (self.class_std > 0):
            raise ConfigError("class_std", "must be positive")
        if not (self.background_std > 0):
            raise ConfigError("background_std", "must be positive")
        if not (0.0 <= self.disagreement_rate <= 1.0):
            raise ConfigError("disagreement_rate", f"{self.disagreement_rate} is outside [0, 1]")
        if self.class_means is not None:
            if len(self.class_means) != len(self.dims):
                raise ConfigError("class_means", "need one entry per view")
            for m, d in zip(self.class_means, self.dims):
                arr = np.asarray(m, dtype=float)
                if arr.shape != (self.n_foreground_classes, d):
                    raise ConfigError("class_means", f"expected shape ({self.n_foreground_classes}, {d}), got {arr.shape}")
        if self.background_mean is not None:
            if len(self.background_mean) != len(self.dims):
                raise ConfigError("background_mean", "need one entry per view")
            for m, d in zip(self.background_mean, self.dims):
                if np.asarray(m, dtype=float).shape != (d,):
                    raise ConfigError("background_mean", f"expected length {d}")


def _draw_block(rng, means_per_view, labels, std) -> SampleBlock:
    views = [rng.normal(means[labels_idx], std) for means, labels_idx in means_per_view]
    labels = np.asarray(labels, dtype=np.int64)
    return SampleBlock(views, np.repeat(labels[:, None], len(views), axis=1), labels)


def _foreground_block(rng, cfg: SyntheticConfig, means: list[np.ndarray], count: int) -> SampleBlock:
    labels = np.repeat(np.arange(1, cfg.n_foreground_classes + 1), count)
    return _draw_block(rng, [(m, labels - 1) for m in means], labels, cfg.class_std)


def generate_synthetic(config: SyntheticConfig) -> MultiViewDataset:
    """Draw a Gaussian multi-view dataset, inject disagreement, add redundant background.

    The redundant background count equals the average number of redundant
    foreground samples per class after injection.
    """
    config.validate()
    means = config.resolved_class_means()
    bg_mean = config.resolved_background_mean()
    seed = config.rng_seed

    train = _foreground_block(make_rng(seed, "train"), config, means, config.per_class_count)
    test = _foreground_block(make_rng(seed, "test"), config, means, config.test_per_class)
    ds = MultiViewDataset(
        config.dims, config.n_foreground_classes, train, test,
        background_mean=bg_mean, background_std=config.background_std,
    )
    if config.disagreement_rate > 0:
        ds = inject_view_disagreement(ds, config.disagreement_rate, sub_seed(seed, "inject"))

    if config.redundant_background:
        n_clean = int(np.sum(ds.unlabeled.redundant() & (ds.unlabeled.nominal != BACKGROUND)))
        n_bg = round_half_up(n_clean / config.n_foreground_classes)
        labels = np.zeros(n_bg, dtype=np.int64)
        bg = _draw_block(make_rng(seed, "background"), [(m[None, :], labels) for m in bg_mean], labels, config.background_std)
        ds = replace(ds, unlabeled=ds.unlabeled.concat(bg), unlabeled_mask=None)
    return ds


def inject_view_disagreement(dataset: MultiViewDataset, rate: float, rng_seed: int) -> MultiViewDataset:
    """Replace one uniformly chosen view of ``round(rate * m)`` foreground samples with background.

    ``m`` counts foreground samples in the unlabeled pool; only currently
    redundant samples are eligible so no sample ever loses all its views.
    """
    if not (0.0 <= rate <= 1.0):
        raise ConfigError("rate", f"{rate} is outside [0, 1]")
    pool = dataset.unlabeled
    fg = np.flatnonzero(pool.nominal != BACKGROUND)
    if len(fg) == 0:
        raise InsufficientSamplesError("no foreground samples in the unlabeled pool")
    n_corrupt = round_half_up(rate * len(fg))
    if n_corrupt == 0:
        return replace(dataset, unlabeled=pool.copy(), unlabeled_mask=dataset.unlabeled_mask.copy())
    if dataset.background_mean is None:
        raise ConfigError("background_mean", "dataset carries no background distribution")
    eligible = fg[pool.redundant()[fg]]
    if n_corrupt > len(eligible):
        raise InsufficientSamplesError(f"need {n_corrupt} redundant foreground samples to corrupt, have {len(eligible)}")

    rng = make_rng(rng_seed)
    chosen = np.sort(rng.choice(eligible, size=n_corrupt, replace=False))
    which_view = rng.integers(dataset.V, size=n_corrupt)
    out = pool.copy()
    for k, v in zip(chosen, which_view):
        out.views[v][k] = rng.normal(dataset.background_mean[v], dataset.background_std)
        out.true_view_labels[k, v] = BACKGROUND
    return replace(dataset, unlabeled=out, unlabeled_mask=dataset.unlabeled_mask.copy())


def split_labeled_unlabeled(
    dataset: MultiViewDataset,
    per_class_seed_count: int,
    rng_seed: int,
    include_background: bool = False,
) -> MultiViewDataset:
    """Move ``per_class_seed_count`` redundant samples of each class into the seed sets."""
    if per_class_seed_count < 0:
        raise ConfigError("per_class_seed_count", "must be non-negative")
    pool = dataset.unlabeled
    classes = list(range(1, dataset.n_classes + 1))
    if include_background:
        classes = [BACKGROUND] + classes
    rng = make_rng(rng_seed)
    clean = pool.redundant()
    picked = []
    for c in classes:
        candidates = np.flatnonzero(clean & (pool.nominal == c))
        if len(candidates) < per_class_seed_count:
            raise InsufficientSamplesError(
                f"{label_name(c)}: need {per_class_seed_count} clean samples, "
                f"have {len(candidates)} (shortfall {per_class_seed_count - len(candidates)})"
            )
        picked.append(rng.choice(candidates, size=per_class_seed_count, replace=False))
    picked = np.concatenate(picked).astype(np.int64) if picked else np.zeros(0, dtype=np.int64)
    keep = np.setdiff1d(np.arange(len(pool)), picked)
    return replace(
        dataset,
        seed=dataset.seed.concat(pool.take(picked)),
        unlabeled=pool.take(keep),
        unlabeled_mask=dataset.unlabeled_mask[keep],
    )


# --- JSON Lines I/O -------------------------------------------------------

_ROLES = ("seed", "unlabeled", "test")


def save_dataset(dataset: MultiViewDataset, path) -> None:
    header = {"V": dataset.V, "dims": list(dataset.dims), "n_classes": dataset.n_classes}
    if dataset.background_mean is not None:
        header["background"] = {
            "mean": [m.tolist() for m in dataset.background_mean],
            "std": dataset.background_std,
        }
    lines = [json.dumps(header)]
    for role, block in (("seed", dataset.seed), ("unlabeled", dataset.unlabeled), ("test", dataset.test)):
        for k in range(len(block)):
            rec = {
                "views": [v[k].tolist() for v in block.views],
                "true_view_labels": block.true_view_labels[k].tolist(),
                "nominal_label": int(block.nominal[k]),
                "role": role,
            }
            if role == "unlabeled" and not dataset.unlabeled_mask[k].all():
                rec["mask"] = dataset.unlabeled_mask[k].tolist()
            lines.append(json.dumps(rec))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _parse_header(obj, lineno):
    if not isinstance(obj, dict):
        raise DatasetFormatError(lineno, "header must be a JSON object")
    for key in ("V", "dims", "n_classes"):
        if key not in obj:
            raise DatasetFormatError(lineno, f"header missing '{key}'")
    V, dims, n = obj["V"], obj["dims"], obj["n_classes"]
    if not isinstance(V, int) or not isinstance(dims, list) or len(dims) != V or not all(isinstance(d, int) and d > 0 for d in dims):
        raise DatasetFormatError(lineno, "header V/dims inconsistent")
    if not isinstance(n, int) or n < 1:
        raise DatasetFormatError(lineno, "n_classes must be a positive integer")
    return obj


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def load_dataset(path) -> MultiViewDataset:
    text = Path(path).read_text()
    rows = [(i + 1, line) for i, line in enumerate(text.splitlines()) if line.strip()]
    if not rows:
        raise DatasetFormatError(1, "empty file")

    def parse(lineno, line):
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(lineno, f"invalid JSON ({exc.msg})") from None

    header = _parse_header(parse(*rows[0]), rows[0][0])
    V, dims, n_classes = header["V"], tuple(header["dims"]), header["n_classes"]
    acc = {role: ([[] for _ in range(V)], [], []) for role in _ROLES}
    masks = []
    for lineno, line in rows[1:]:
        rec = parse(lineno, line)
        if not isinstance(rec, dict):
            raise DatasetFormatError(lineno, "record must be a JSON object")
        role = rec.get("role")
        if role not in _ROLES:
            raise DatasetFormatError(lineno, f"unknown role {role!r}")
        views, tvl, nominal = rec.get("views"), rec.get("true_view_labels"), rec.get("nominal_label")
        if not isinstance(views, list) or len(views) != V:
            raise DatasetFormatError(lineno, f"expected {V} views")
        for v, d in zip(views, dims):
            if not isinstance(v, list) or len(v) != d or not all(_is_number(x) for x in v):
                raise DatasetFormatError(lineno, f"view must be a list of {d} numbers")
        if not isinstance(tvl, list) or len(tvl) != V:
            raise DatasetFormatError(lineno, f"expected {V} true_view_labels")
        for t in [*tvl, nominal]:
            if not isinstance(t, int) or isinstance(t, bool) or not 0 <= t <= n_classes:
                raise DatasetFormatError(lineno, f"label {t!r} outside 0..{n_classes}")
        if nominal == BACKGROUND and any(t != BACKGROUND for t in tvl):
            raise DatasetFormatError(lineno, "background sample has a foreground view")
        block_views, block_tvl, block_nom = acc[role]
        for i, v in enumerate(views):
            block_views[i].append(v)
        block_tvl.append(tvl)
        block_nom.append(nominal)
        if role == "unlabeled":
            mask = rec.get("mask", [True] * V)
            if not isinstance(mask, list) or len(mask) != V or not all(isinstance(b, bool) for b in mask):
                raise DatasetFormatError(lineno, "mask must be a list of V booleans")
            masks.append(mask)

    def build(role):
        views, tvl, nom = acc[role]
        if not nom:
            return SampleBlock.empty(dims)
        return SampleBlock([np.array(v, dtype=float).reshape(-1, d) for v, d in zip(views, dims)], tvl, nom)

    bg = header.get("background")
    return MultiViewDataset(
        dims, n_classes,
        unlabeled=build("unlabeled"),
        test=build("test"),
        seed=build("seed"),
        unlabeled_mask=np.array(masks, dtype=bool).reshape(-1, V),
        background_mean=[np.array(m, dtype=float) for m in bg["mean"]] if bg else None,
        background_std=float(bg["std"]) if bg else 1.0,
    )
