"""Synthetic straight-edge training patches and labeled training sets.

A patch is split into a dark and a bright zone by a vertical, horizontal or
diagonal boundary; each pixel gets its zone mean plus uniform noise. Pixels
with a 4-neighbour in the other zone are labeled +1 (edge), all others -1.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .edgedetect import extract_features
from .imagecore import Image, normalize
from .svmcore import TrainingSet

ORIENTATIONS = ("vertical", "horizontal", "diagonal_main", "diagonal_anti")
# the three boundary directions used for training by default
TRAIN_ORIENTATIONS = ("vertical", "horizontal", "diagonal_main")


@dataclass(frozen=True)
class PatchSpec:
    size: int = 16
    orientation: str = "vertical"
    dark_mean: float = 0.25
    mean_diff: float = 0.25
    noise_amp: float = 0.03
    seed: int = 0
    inverted: bool = False

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"unknown orientation {self.orientation!r}")
        if int(self.size) != self.size or self.size < 4:
            raise ValueError(f"patch size must be an integer >= 4, got {self.size!r}")
        if not 0.0 <= self.dark_mean <= 1.0:
            raise ValueError("dark_mean must lie in [0, 1]")
        if not 0.0 < self.mean_diff <= 1.0:
            raise ValueError("mean_diff must lie in (0, 1]")
        if self.noise_amp < 0:
            raise ValueError("noise_amp must be non-negative")
        eps = 1e-12
        if self.dark_mean + self.mean_diff + self.noise_amp > 1.0 + eps:
            raise ValueError("dark_mean + mean_diff + noise_amp exceeds 1")
        if self.dark_mean - self.noise_amp < -eps:
            raise ValueError("dark_mean - noise_amp is negative")

    @property
    def bright_mean(self) -> float:
        return self.dark_mean + self.mean_diff


@dataclass(frozen=True, eq=False)
class LabeledPatch:
    """A generated patch: float intensities, the 8-bit image, edge labels."""

    spec: PatchSpec
    values: np.ndarray
    labels: np.ndarray

    @property
    def image(self) -> Image:
        return Image.from_float(self.values)

    @property
    def edge_mask(self) -> np.ndarray:
        return self.labels == 1


def dark_zone(size: int, orientation: str) -> np.ndarray:
    """Boolean mask of the dark zone for a ``size`` x ``size`` patch."""
    row, col = np.indices((size, size))
    if orientation == "vertical":
        return col < size / 2
    if orientation == "horizontal":
        return row < size / 2
    if orientation == "diagonal_main":
        return row > col
    if orientation == "diagonal_anti":
        return row + col < size
    raise ValueError(f"unknown orientation {orientation!r}")


def boundary_labels(zone: np.ndarray) -> np.ndarray:
    """+1 where any in-bounds 4-neighbour lies in the other zone, else -1."""
    cross = np.zeros(zone.shape, dtype=bool)
    diff_v = zone[1:, :] != zone[:-1, :]
    diff_h = zone[:, 1:] != zone[:, :-1]
    cross[1:, :] |= diff_v
    cross[:-1, :] |= diff_v
    cross[:, 1:] |= diff_h
    cross[:, :-1] |= diff_h
    return np.where(cross, 1, -1).astype(np.int8)


def generate_patch(spec: PatchSpec) -> LabeledPatch:
    """Render a noisy two-zone patch and its edge labels (deterministic in seed).

    With ``spec.inverted`` the zones swap intensities; labels are unchanged.
    """
    zone = dark_zone(spec.size, spec.orientation)
    if spec.inverted:
        zone = ~zone
    mean = np.where(zone, spec.dark_mean, spec.bright_mean)
    rng = np.random.default_rng(spec.seed)
    noise = rng.uniform(-spec.noise_amp, spec.noise_amp, size=zone.shape)
    values = np.clip(mean + noise, 0.0, 1.0)
    return LabeledPatch(spec=spec, values=values, labels=boundary_labels(zone))


def default_patch_specs(seed: int = 0, n_seeds: int = 4,
                        orientations: Sequence[str] = TRAIN_ORIENTATIONS,
                        **overrides) -> list[PatchSpec]:
    """Default training patches: each orientation repeated with ``n_seeds`` seeds.

    Odd-numbered seeds of each orientation get swapped zones, so both edge
    polarities (dark-to-bright and bright-to-dark) appear in training.
    """
    ss = np.random.SeedSequence(seed)
    seeds = ss.generate_state(len(orientations) * n_seeds, dtype=np.uint64)
    specs = []
    for k, orient in enumerate(orientations):
        for s in range(n_seeds):
            specs.append(PatchSpec(orientation=orient, seed=int(seeds[k * n_seeds + s]),
                                   inverted=bool(s % 2), **overrides))
    return specs


def _subsample(idx_neg, n_keep, rng):
    if n_keep >= idx_neg.shape[0]:
        return idx_neg
    return np.sort(rng.choice(idx_neg, size=n_keep, replace=False))


def build_training_set(specs: Iterable[PatchSpec], neg_ratio: Optional[float] = 3.0,
                       seed: int = 0) -> TrainingSet:
    """Extract labeled feature vectors from the interior pixels of each patch.

    Parameters
    ----------
    specs : iterable of PatchSpec
        Must span at least two orientations.
    neg_ratio : float or None
        Keep at most ``neg_ratio`` negatives per positive in every patch,
        chosen at random (seeded). ``None`` keeps every pixel.
    seed : int
        Seed for the negative subsampling.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("no patch specs given")
    present = {s.orientation for s in specs}
    if len(present) < 2:
        raise ValueError(f"training patches cover a single orientation ({present.pop()})")
    if not present & {"diagonal_main", "diagonal_anti"} or not {"vertical", "horizontal"} <= present:
        warnings.warn(f"training orientations {sorted(present)} do not cover "
                      "vertical, horizontal and diagonal edges", stacklevel=2)
    if neg_ratio is not None and neg_ratio <= 0:
        raise ValueError("neg_ratio must be positive")

    xs, ys = [], []
    for k, spec in enumerate(specs):
        patch = generate_patch(spec)
        feats = extract_features(normalize(patch.image))
        x = feats[1:-1, 1:-1].reshape(-1, 3)
        y = patch.labels[1:-1, 1:-1].ravel().astype(np.int64)
        if neg_ratio is not None:
            rng = np.random.default_rng([seed, k])
            pos = np.flatnonzero(y == 1)
            neg = _subsample(np.flatnonzero(y == -1), int(round(neg_ratio * pos.shape[0])), rng)
            keep = np.sort(np.concatenate([pos, neg]))
            x, y = x[keep], y[keep]
        xs.append(x)
        ys.append(y)
    desc = f"synthdata: {len(specs)} patches, orientations={sorted(present)}, neg_ratio={neg_ratio}, seed={seed}"
    return TrainingSet(np.concatenate(xs), np.concatenate(ys), source=desc)
