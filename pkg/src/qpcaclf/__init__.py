"""Simulated quantum image classification with principal components."""
from .classifier import (
    ClassificationResult,
    ClassifierModel,
    Decision,
    analytic_report,
    build_projector,
    classical_likelihood,
    classify,
    run_trial,
    yes_probability,
)
from .encoding import (
    EncodedComponent,
    EncodedImage,
    decode_neqr,
    encode_component,
    encode_frqi,
    encode_image,
    encode_neqr,
    encode_pixel,
    representation_inner_product,
)
from .estimator import QuantumPCAClassifier
from .exceptions import *  # noqa: F401,F403
from .model_io import load_image, load_model, save_model, to_feature_vector
from .pca import build_data_matrix, extract_components, fit_components, svd
from .quantum import (
    MeasurementOutcome,
    ProjectorOperator,
    StateVector,
    collapse,
    direct_sum,
    inner_product,
    outcome_probability,
    tensor_product,
)

__version__ = "0.1.0"
