"""Feature extraction from frozen multimodal models into the interchange format."""

from .backends import ExtractionFailure, MockBackend, ModelBackend, build_backend
from .config import AdapterConfig, ConfigError, DatasetDescriptor, load_config
from .extract import DatasetStats, extract, extract_dataset
from .prompts import VQA_GENERATION_TEMPLATE, synth_prompt_render

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "ConfigError",
    "DatasetDescriptor",
    "DatasetStats",
    "ExtractionFailure",
    "MockBackend",
    "ModelBackend",
    "VQA_GENERATION_TEMPLATE",
    "build_backend",
    "extract",
    "extract_dataset",
    "load_config",
    "synth_prompt_render",
]
