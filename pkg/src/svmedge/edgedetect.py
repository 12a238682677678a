"""Per-pixel feature extraction, SVM/Sobel/Canny edge detectors and metrics.

All detectors return an :class:`EdgeMap` of the source size whose outermost
one-pixel frame is always non-edge.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .imagecore import Image, normalize, save_pgm

METHODS = ("svm", "sobel", "canny")
DEFAULT_THRESHOLDS = {"svm": 0.0, "sobel": 0.25}


@dataclass(frozen=True, eq=False)
class EdgeMap:
    """Binary edge decisions, plus raw SVM decision values when available.

    ``raw`` is NaN on the border frame, where no feature is defined.
    """

    edges: np.ndarray
    raw: Optional[np.ndarray] = None

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=bool)
        if e.ndim != 2:
            raise ValueError("edge map must be 2-D")
        if self.raw is not None and np.shape(self.raw) != e.shape:
            raise ValueError("raw values and edge flags differ in shape")
        object.__setattr__(self, "edges", e)

    @property
    def width(self) -> int:
        return self.edges.shape[1]

    @property
    def height(self) -> int:
        return self.edges.shape[0]

    @property
    def count(self) -> int:
        return int(self.edges.sum())

    def to_image(self) -> Image:
        return Image(np.where(self.edges, 255, 0).astype(np.uint8))

    @classmethod
    def from_image(cls, image: Image) -> "EdgeMap":
        """Any nonzero pixel counts as an edge."""
        return cls(image.pixels > 0)


@dataclass(frozen=True)
class DetectorConfig:
    """Detector choice and thresholds.

    ``threshold`` is the cutoff on the raw decision value for ``svm`` and the
    fraction of the maximum gradient magnitude for ``sobel``; ``None`` picks
    the method default. Canny uses ``canny_low``/``canny_high`` as
    fractions of the maximum magnitude.
    """

    method: str = "svm"
    threshold: Optional[float] = None
    canny_low: float = 0.1
    canny_high: float = 0.2
    canny_smooth_sigma: float = 1.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not (0 < self.canny_low < 1 and 0 < self.canny_high < 1):
            raise ValueError("canny fractions must lie in (0, 1)")
        if not self.canny_low < self.canny_high:
            raise ValueError("canny low threshold must be below the high threshold")
        if not self.canny_smooth_sigma > 0:
            raise ValueError("canny_smooth_sigma must be positive")
        if self.threshold is not None:
            if math.isnan(self.threshold):
                raise ValueError("threshold is NaN")
            if self.method == "sobel" and not 0 < self.threshold < 1:
                raise ValueError("sobel threshold is a fraction in (0, 1)")

    @property
    def effective_threshold(self) -> Optional[float]:
        if self.threshold is not None:
            return float(self.threshold)
        return DEFAULT_THRESHOLDS.get(self.method)


def _as_grid(image) -> np.ndarray:
    if isinstance(image, Image):
        return normalize(image)
    return np.asarray(image, dtype=np.float64)


def extract_feature(grid, row: int, col: int) -> np.ndarray:
    """Intensity differences around an interior pixel.

    Returns ``(c1, c2, c3)``: the horizontal central difference / 2, the
    vertical central difference / 2, and the summed diagonal differences
    ``(I[r+1,c+1] - I[r-1,c-1] + I[r+1,c-1] - I[r-1,c+1]) / 4``.
    """
    g = _as_grid(grid)
    h, w = g.shape
    if not (1 <= row <= h - 2 and 1 <= col <= w - 2):
        raise IndexError(f"pixel ({row}, {col}) is on the border of a {h}x{w} image")
    c1 = (g[row, col + 1] - g[row, col - 1]) / 2.0
    c2 = (g[row + 1, col] - g[row - 1, col]) / 2.0
    c3 = (g[row + 1, col + 1] - g[row - 1, col - 1] + g[row + 1, col - 1] - g[row - 1, col + 1]) / 4.0
    return np.array([c1, c2, c3])


def extract_features(grid) -> np.ndarray:
    """Features for every pixel as an ``(H, W, 3)`` array; border rows/cols are zero."""
    g = _as_grid(grid)
    h, w = g.shape
    out = np.zeros((h, w, 3))
    if h < 3 or w < 3:
        return out
    out[1:-1, 1:-1, 0] = (g[1:-1, 2:] - g[1:-1, :-2]) / 2.0
    out[1:-1, 1:-1, 1] = (g[2:, 1:-1] - g[:-2, 1:-1]) / 2.0
    out[1:-1, 1:-1, 2] = (g[2:, 2:] - g[:-2, :-2] + g[2:, :-2] - g[:-2, 2:]) / 4.0
    return out


def detect_svm(image: Image, model, cfg: DetectorConfig = DetectorConfig(),
               workers: int = 1) -> EdgeMap:
    """Classify every interior pixel with a trained SVM.

    A pixel is an edge when its raw decision value exceeds the threshold.
    ``workers > 1`` evaluates fixed-size blocks in a thread pool; the output
    is identical to the sequential result.
    """
    from .svmcore import DECISION_BLOCK, SvmModel, decision_values

    if not isinstance(model, SvmModel):
        raise TypeError("detect_svm needs a trained SvmModel")
    g = normalize(image)
    h, w = g.shape
    if h < 3 or w < 3:
        raise ValueError("image must be at least 3x3")
    feats = extract_features(g)[1:-1, 1:-1].reshape(-1, 3)
    blocks = [feats[s:s + DECISION_BLOCK] for s in range(0, feats.shape[0], DECISION_BLOCK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: decision_values(model, b), blocks))
    else:
        parts = [decision_values(model, b) for b in blocks]
    raw = np.full((h, w), np.nan)
    raw[1:-1, 1:-1] = np.concatenate(parts).reshape(h - 2, w - 2)
    thr = cfg.effective_threshold if cfg.method == "svm" else 0.0
    edges = np.zeros((h, w), dtype=bool)
    edges[1:-1, 1:-1] = raw[1:-1, 1:-1] > thr
    return EdgeMap(edges, raw)


def sobel_gradients(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel responses ``(gx, gy)``; zero on the border frame.

    ``gx`` is right-minus-left, ``gy`` is bottom-minus-top.
    """
    v = np.asarray(values, dtype=np.float64)
    gx = np.zeros_like(v)
    gy = np.zeros_like(v)
    gx[1:-1, 1:-1] = ((v[:-2, 2:] + 2.0 * v[1:-1, 2:] + v[2:, 2:])
                      - (v[:-2, :-2] + 2.0 * v[1:-1, :-2] + v[2:, :-2]))
    gy[1:-1, 1:-1] = ((v[2:, :-2] + 2.0 * v[2:, 1:-1] + v[2:, 2:])
                      - (v[:-2, :-2] + 2.0 * v[:-2, 1:-1] + v[:-2, 2:]))
    return gx, gy


def detect_sobel(image: Image, cfg: DetectorConfig = DetectorConfig("sobel")) -> EdgeMap:
    """Threshold the Sobel gradient magnitude at a fraction of its maximum."""
    if image.height < 3 or image.width < 3:
        raise ValueError("image must be at least 3x3")
    # integer-valued float arithmetic: exact, so rotations commute bit-for-bit
    gx, gy = sobel_gradients(image.pixels.astype(np.float64))
    mag = np.hypot(gx, gy)
    peak = mag.max()
    frac = cfg.effective_threshold if cfg.method == "sobel" else DEFAULT_THRESHOLDS["sobel"]
    if peak == 0:
        return EdgeMap(np.zeros(mag.shape, dtype=bool))
    return EdgeMap(mag > frac * peak)


def _non_max_suppression(mag, gx, gy):
    # 4 direction bins; a pixel survives if it beats its backward neighbour
    # strictly and its forward neighbour or ties it, so two-pixel plateaus
    # thin to one pixel.
    h, w = mag.shape
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    bins = (np.floor((angle + 22.5) / 45.0).astype(int)) % 4
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    padded = np.pad(mag, 1)
    keep = np.zeros((h, w), dtype=bool)
    for b, (dr, dc) in offsets.items():
        fwd = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        back = padded[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        sel = bins == b
        keep |= sel & (mag > back) & (mag >= fwd)
    return np.where(keep, mag, 0.0)


def detect_canny(image: Image, cfg: DetectorConfig = DetectorConfig("canny")) -> EdgeMap:
    """Canny detector: Gaussian smoothing, Sobel gradients, non-maximum
    suppression and 8-connected hysteresis with thresholds relative to the
    maximum gradient magnitude."""
    if image.height < 5 or image.width < 5:
        raise ValueError("image must be at least 5x5")
    smooth = ndimage.gaussian_filter(normalize(image), cfg.canny_smooth_sigma,
                                     mode="nearest", truncate=3.0)
    gx, gy = sobel_gradients(smooth)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    edges = np.zeros(mag.shape, dtype=bool)
    if peak <= 0:
        return EdgeMap(edges)
    thin = _non_max_suppression(mag, gx, gy)
    strong = thin >= cfg.canny_high * peak
    weak = thin >= cfg.canny_low * peak
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n:
        has_strong = np.zeros(n + 1, dtype=bool)
        has_strong[np.unique(labels[strong])] = True
        has_strong[0] = False
        edges = has_strong[labels]
    edges[0, :] = edges[-1, :] = False
    edges[:, 0] = edges[:, -1] = False
    return EdgeMap(edges)


def detect(image: Image, cfg: DetectorConfig, model=None, workers: int = 1) -> EdgeMap:
    """Run the detector named by ``cfg.method``."""
    if cfg.method == "svm":
        if model is None:
            raise ValueError("the svm detector needs a model")
        return detect_svm(image, model, cfg, workers=workers)
    if cfg.method == "sobel":
        return detect_sobel(image, cfg)
    return detect_canny(image, cfg)


@dataclass(frozen=True)
class EdgeScores:
    precision: float
    recall: float
    f1: float


def _f1(p, r):
    return 0.0 if p + r == 0 else 2.0 * p * r / (p + r)


def _greedy_matches(pred, truth, tol):
    # candidate pairs ordered by Chebyshev distance, then raster order
    pr, pc = np.nonzero(pred)
    h, w = pred.shape
    truth_idx = -np.ones(pred.shape, dtype=np.int64)
    truth_idx[truth] = np.arange(int(truth.sum()))
    pairs = []
    for dr in range(-tol, tol + 1):
        for dc in range(-tol, tol + 1):
            r, c = pr + dr, pc + dc
            ok = (r >= 0) & (r < h) & (c >= 0) & (c < w)
            t = np.full(pr.shape, -1, dtype=np.int64)
            t[ok] = truth_idx[r[ok], c[ok]]
            hit = t >= 0
            d = max(abs(dr), abs(dc))
            pairs.append(np.stack([np.full(hit.sum(), d), np.flatnonzero(hit), t[hit]], axis=1))
    pairs = np.concatenate(pairs) if pairs else np.zeros((0, 3), dtype=np.int64)
    order = np.lexsort((pairs[:, 2], pairs[:, 1], pairs[:, 0]))
    used_p = np.zeros(pr.shape[0], dtype=bool)
    used_t = np.zeros(int(truth.sum()), dtype=bool)
    matched = 0
    for _, p, t in pairs[order]:
        if not used_p[p] and not used_t[t]:
            used_p[p] = used_t[t] = True
            matched += 1
    return matched


def edge_metrics(predicted, truth, tolerance_px: int = 1,
                 matching: str = "tolerance") -> EdgeScores:
    """Precision, recall and F1 of a predicted edge map against ground truth.

    ``matching="tolerance"`` counts a predicted pixel as correct when a truth
    pixel lies within Chebyshev distance ``tolerance_px`` and a truth pixel
    as recalled when a prediction lies within the same distance.
    ``matching="greedy"`` instead pairs pixels one-to-one, closest pairs
    first (ties in raster order).
    """
    p = predicted.edges if isinstance(predicted, EdgeMap) else np.asarray(predicted, dtype=bool)
    t = truth.edges if isinstance(truth, EdgeMap) else np.asarray(truth, dtype=bool)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: predicted {p.shape} vs truth {t.shape}")
    if tolerance_px < 0:
        raise ValueError("tolerance_px must be >= 0")
    n_p, n_t = int(p.sum()), int(t.sum())
    if n_p == 0 and n_t == 0:
        return EdgeScores(1.0, 1.0, 1.0)
    if n_p == 0:
        return EdgeScores(0.0, 0.0, 0.0)
    if n_t == 0:
        return EdgeScores(0.0, 1.0, 0.0)
    if matching == "tolerance":
        box = np.ones((2 * tolerance_px + 1,) * 2, dtype=bool)
        near_t = ndimage.binary_dilation(t, structure=box) if tolerance_px else t
        near_p = ndimage.binary_dilation(p, structure=box) if tolerance_px else p
        precision = float((p & near_t).sum()) / n_p
        recall = float((t & near_p).sum()) / n_t
    elif matching == "greedy":
        m = _greedy_matches(p, t, tolerance_px)
        precision, recall = m / n_p, m / n_t
    else:
        raise ValueError(f"unknown matching mode {matching!r}")
    return EdgeScores(precision, recall, _f1(precision, recall))


def save_edge_map(edge_map: EdgeMap, path) -> None:
    """Write edges as a PGM: 255 for edge, 0 otherwise."""
    save_pgm(edge_map.to_image(), path)


def save_raw_text(edge_map: EdgeMap, path) -> None:
    """Write raw decision values as a whitespace-separated text grid."""
    if edge_map.raw is None:
        raise ValueError("edge map has no raw decision values")
    np.savetxt(path, edge_map.raw, fmt="%.17g")
