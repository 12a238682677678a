"""
Timing table
============

Median wall time of each detector over three 256 x 256 images, laid out
with the proposed method first, then Canny, then Sobel. Absolute numbers
depend on the machine; the harness only reports them.
"""
import numpy as np
from scipy import ndimage

from svmedge import Image, KernelSpec, PatchSpec, build_training_set, default_patch_specs, generate_patch, train
from svmedge.clibench import BenchReport, run_bench

rng = np.random.default_rng(1)
texture = ndimage.gaussian_filter(rng.uniform(0, 255, (256, 256)), 3)
texture = (texture - texture.min()) / np.ptp(texture) * 255
images = {
    "diagonal": generate_patch(PatchSpec(256, "diagonal_main", 0.2, 0.5, 0.03, seed=2)).image,
    "vertical": generate_patch(PatchSpec(256, "vertical", 0.3, 0.4, 0.03, seed=3)).image,
    "texture": Image(np.rint(texture)),
}

model = train(build_training_set(default_patch_specs(0)), KernelSpec("rbf3", 0.6), C=10.0)
report = run_bench(images, model=model, repeats=5)
print(report.to_text())

###############################################################################
# The CSV form parses back into the same report.

assert BenchReport.from_csv(report.to_csv()) == report
print(report.to_csv())
