"""Training-free prediction of fine-tuning data influence on target benchmarks.

Given per-sample embeddings and answer-token log-probabilities produced by a
frozen multimodal model, the toolkit scores every (source dataset, target
benchmark) pair, evaluates ranking quality against observed improvements,
and allocates or selects training data under a fixed sample budget.
"""

from .diversity import (
    ClusterAssignment,
    DiversityScore,
    FieldPolicy,
    diversity_score,
    kmeans,
    normalized_entropy,
    silhouette,
)
from .ingest import (
    FORMAT_VERSION,
    DatasetEntry,
    FieldKind,
    Manifest,
    Role,
    SampleRecord,
    SampleSet,
    ValidationReport,
    load_manifest,
    load_sample_file,
    load_samples,
    validate_manifest,
)
from .metric import (
    DatasetSummary,
    Factor,
    InfluenceMatrix,
    ablated_score,
    influence_matrix,
    influence_score,
    instance_score,
    summarize,
)
from .ranking import (
    ObservedMatrix,
    TauReport,
    kendall_tau,
    relative_improvement,
    two_way_eval,
)
from .selection import (
    AllocationPlan,
    SelectedSet,
    SelectionMode,
    ShortfallPolicy,
    allocate,
    sample_allocation,
    select_instances,
    validity_filter,
)
from .stats import (
    SimilarityTriple,
    dataset_perplexity,
    expected_cosine,
    field_centroid,
    normalized_field,
    pairwise_expected_cosine_oracle,
    sample_mean_logprob,
    similarity_triple,
)
from .worldgen import SyntheticWorld, WorldSpec, ablation_sweep, generate_world

__version__ = "0.1.0"

__all__ = [
    "FORMAT_VERSION",
    "AllocationPlan",
    "ClusterAssignment",
    "DatasetEntry",
    "DatasetSummary",
    "DiversityScore",
    "Factor",
    "FieldKind",
    "FieldPolicy",
    "InfluenceMatrix",
    "Manifest",
    "ObservedMatrix",
    "Role",
    "SampleRecord",
    "SampleSet",
    "SelectedSet",
    "SelectionMode",
    "ShortfallPolicy",
    "SimilarityTriple",
    "SyntheticWorld",
    "TauReport",
    "ValidationReport",
    "WorldSpec",
    "ablated_score",
    "ablation_sweep",
    "allocate",
    "dataset_perplexity",
    "diversity_score",
    "expected_cosine",
    "field_centroid",
    "generate_world",
    "influence_matrix",
    "influence_score",
    "instance_score",
    "kendall_tau",
    "kmeans",
    "load_manifest",
    "load_sample_file",
    "load_samples",
    "normalized_entropy",
    "normalized_field",
    "pairwise_expected_cosine_oracle",
    "relative_improvement",
    "sample_allocation",
    "sample_mean_logprob",
    "select_instances",
    "silhouette",
    "similarity_triple",
    "summarize",
    "two_way_eval",
    "validate_manifest",
    "validity_filter",
]
