"""edusent: sentiment analysis for student course feedback.

A self-contained pipeline: CSV ingestion with star-rating labels, text
cleaning, TF-IDF + chi-squared feature selection, SMOTE balancing, a
logistic-regression baseline, and a BiLSTM-with-attention classifier
trained by hand-written backpropagation. See the `edusent` CLI for the
end-to-end workflow.
"""

from . import (
    config,
    evalmetrics,
    features,
    ingest,
    linear,
    neural,
    pipeline,
    resample,
    svgplot,
    textprep,
)
from .errors import EdusentError, SchemaError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "EdusentError",
    "SchemaError",
    "ValidationError",
    "config",
    "evalmetrics",
    "features",
    "ingest",
    "linear",
    "neural",
    "pipeline",
    "resample",
    "svgplot",
    "textprep",
    "__version__",
]
