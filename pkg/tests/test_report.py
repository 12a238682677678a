import numpy as np
import pytest

from svmedge.clibench.report import BenchReport, BenchRow, run_bench
from svmedge.edgedetect import EdgeMap
from svmedge.imagecore import Image
from svmedge.synthdata import PatchSpec, generate_patch


def test_csv_roundtrip():
    rep = BenchReport(rows=[BenchRow("a", "svm", 0.123456789012, 10, 0.95),
                            BenchRow("a", "canny", 1e-5, 0, None)],
                      environment="test host, 4 cores")
    assert BenchReport.from_csv(rep.to_csv()) == rep


def test_run_bench_shape(default_model):
    rng = np.random.default_rng(0)
    images = {f"img{k}": Image(rng.integers(0, 256, (24, 24))) for k in range(3)}
    rep = run_bench(images, ["sobel", "svm", "canny"], model=default_model, repeats=3)
    assert len(rep.rows) == 9
    assert [r.method for r in rep.rows[:3]] == ["svm", "canny", "sobel"]
    assert [r.image for r in rep.rows[::3]] == ["img0", "img1", "img2"]
    assert all(r.seconds >= 0 for r in rep.rows)
    text = rep.to_text()
    header = next(l for l in text.splitlines() if l.startswith("Tested image"))
    assert header.split()[2:] == ["Proposed(s)", "Canny(s)", "Sobel(s)"]
    assert BenchReport.from_csv(rep.to_csv()) == rep


def test_run_bench_with_truth_and_single_method(default_model):
    p = generate_patch(PatchSpec(32, "vertical", noise_amp=0))
    rep = run_bench({"step": p.image}, ["svm"], model=default_model, repeats=3,
                    truths={"step": EdgeMap(p.edge_mask)})
    assert len(rep.rows) == 1 and rep.rows[0].f1 == 1.0


def test_repeats_at_least_three():
    with pytest.raises(ValueError):
        run_bench({"x": Image(np.zeros((8, 8)))}, ["sobel"], repeats=2)
