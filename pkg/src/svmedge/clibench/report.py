"""Timing/quality benchmark of edge detectors and its CSV/text reports."""
from __future__ import annotations

import csv
import io
import platform
import statistics
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ..edgedetect import DetectorConfig, EdgeMap, detect, edge_metrics
from ..imagecore import Image

# column order of the printed table: proposed method first, then baselines
TABLE_METHODS = ("svm", "canny", "sobel")
TIMING_NOTE = ("median wall time of the full detect call (feature extraction "
               "and classification included, file IO excluded)")
CSV_FIELDS = ("image", "method", "seconds", "edge_pixels", "f1")


@dataclass(frozen=True)
class BenchRow:
    image: str
    method: str
    seconds: float
    edge_pixels: int
    f1: Optional[float] = None


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)
    environment: str = ""
    timing: str = TIMING_NOTE

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# environment: {self.environment}\n")
        buf.write(f"# timing: {self.timing}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in self.rows:
            writer.writerow([r.image, r.method, repr(r.seconds), r.edge_pixels,
                             "" if r.f1 is None else repr(r.f1)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BenchReport":
        env, timing = "", TIMING_NOTE
        body = []
        for line in text.splitlines():
            if line.startswith("# environment: "):
                env = line[len("# environment: "):]
            elif line.startswith("# timing: "):
                timing = line[len("# timing: "):]
            elif not line.startswith("#"):
                body.append(line)
        rows = []
        for rec in csv.DictReader(body):
            rows.append(BenchRow(rec["image"], rec["method"], float(rec["seconds"]),
                                 int(rec["edge_pixels"]),
                                 float(rec["f1"]) if rec["f1"] else None))
        return cls(rows=rows, environment=env, timing=timing)

    def to_text(self) -> str:
        """Table of median seconds, one line per image, methods as columns,
        followed by the per-row detail."""
        images = list(dict.fromkeys(r.image for r in self.rows))
        methods = [m for m in TABLE_METHODS if any(r.method == m for r in self.rows)]
        by_key = {(r.image, r.method): r for r in self.rows}
        titles = {"svm": "Proposed(s)", "canny": "Canny(s)", "sobel": "Sobel(s)"}
        width = max([len("Tested image")] + [len(i) for i in images])
        out = [f"# environment: {self.environment}", f"# timing: {self.timing}",
               "Tested image".ljust(width) + "".join(f"  {titles[m]:>12}" for m in methods)]
        for img in images:
            cells = []
            for m in methods:
                r = by_key.get((img, m))
                cells.append(f"  {r.seconds:>12.4f}" if r else f"  {'-':>12}")
            out.append(img.ljust(width) + "".join(cells))
        out.append("")
        out.append(f"{'image':<{width}}  {'method':<6}  {'seconds':>10}  {'edges':>7}  {'f1':>6}")
        for r in self.rows:
            f1 = "" if r.f1 is None else f"{r.f1:.4f}"
            out.append(f"{r.image:<{width}}  {r.method:<6}  {r.seconds:>10.4f}  {r.edge_pixels:>7d}  {f1:>6}")
        return "\n".join(out) + "\n"


def host_description() -> str:
    return f"{platform.platform()}; {platform.processor() or platform.machine()}; python {platform.python_version()}"


def run_bench(images: Mapping[str, Image], methods: Sequence[str] = TABLE_METHODS,
              model=None, repeats: int = 3,
              truths: Optional[Mapping[str, EdgeMap]] = None,
              configs: Optional[Mapping[str, DetectorConfig]] = None,
              workers: int = 1) -> BenchReport:
    """Time every (image, method) pair ``repeats`` times and keep the median.

    Rows come out image-major, methods in :data:`TABLE_METHODS` order.
    """
    if repeats < 3:
        raise ValueError("repeats must be at least 3")
    configs = dict(configs or {})
    truths = truths or {}
    ordered = [m for m in TABLE_METHODS if m in methods]
    rows = []
    for name, image in images.items():
        for method in ordered:
            cfg = configs.get(method, DetectorConfig(method))
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                emap = detect(image, cfg, model=model, workers=workers)
                times.append(time.perf_counter() - t0)
            f1 = None
            if name in truths:
                f1 = edge_metrics(emap, truths[name], 1).f1
            rows.append(BenchRow(name, method, float(statistics.median(times)),
                                 int(np.count_nonzero(emap.edges)), f1))
    return BenchReport(rows=rows, environment=host_description())
