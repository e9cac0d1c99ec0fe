"""Temporal dominance, entropy and complexity curves for TDS panel data."""

from tdsentropy.core import (
    AttributeSet,
    DominanceGrid,
    Issue,
    Measurement,
    SelectionEvent,
    TdsDataset,
    ValidationReport,
    dominant_at,
    expand_dominance,
    normalize_onset,
    validate_dataset,
)
from tdsentropy.errors import (
    DomainError,
    IngestError,
    NoDataError,
    NotFoundError,
    TdsError,
)
from tdsentropy.estimators import (
    ComplexityCurve,
    CurvePoint,
    EntropyCurve,
    chao_shen_entropy,
    complexity_curve,
    complexity_value,
    entropy_curve,
    plugin_entropy,
    selection_probabilities,
    shannon_bits,
)

__version__ = "0.1.0"
