"""Stage-specific five-year survivability models with SHAP and LIME explanations."""

from stagesurv.config import RunConfig
from stagesurv.pipeline import RunResult, run_pipeline

__version__ = "0.1.0"

__all__ = ["RunConfig", "RunResult", "run_pipeline"]
