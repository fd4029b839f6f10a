"""Phase I: source and sink extractors written by the model, checked against labels."""

from .runner import ExtractorExecutionError, SandboxRunner
from .spec import ExtractorSpec, LabeledExample, SpecError, load_extractor_spec
from .synth import (
    ExtractorProgram,
    ExtractorStore,
    SynthesisFailedError,
    ValidationReport,
    obtain_extractor,
    run_extractor,
    synthesize_extractor,
    validate,
)

__all__ = [
    "ExtractorExecutionError",
    "ExtractorProgram",
    "ExtractorSpec",
    "ExtractorStore",
    "LabeledExample",
    "SandboxRunner",
    "SpecError",
    "SynthesisFailedError",
    "ValidationReport",
    "load_extractor_spec",
    "obtain_extractor",
    "run_extractor",
    "synthesize_extractor",
    "validate",
]
