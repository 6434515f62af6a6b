"""Pipeline orchestration, run persistence, CLI, and HTTP API."""

from .pipeline import RunInputs, Service, PipelineError

__all__ = ["RunInputs", "Service", "PipelineError"]
