"""Kernel-SVM edge detection on grayscale images."""
from .imagecore import Image, load_image, load_pgm, load_png, normalize, save_pgm
from .kernels import KernelSpec, centroid_of, gram_matrix, kernel_eval, kernel_matrix, radius_square
from .svmcore import (
    ConvergenceError, QpSolution, SvmModel, TrainingSet, compute_bias, decision_value,
    decision_values, kkt_check, solve_dual, train,
)
from .edgedetect import (
    DetectorConfig, EdgeMap, detect, detect_canny, detect_sobel, detect_svm, edge_metrics,
    extract_feature, extract_features,
)
from .synthdata import LabeledPatch, PatchSpec, build_training_set, default_patch_specs, generate_patch

__version__ = "0.1.0"
