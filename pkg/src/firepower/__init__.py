"""Few-shot cross-architecture CPU power modeling toolkit."""

from .application import FirePowerModel, build_target_model, load_model, save_model
from .dataset import (
    ComponentDef,
    Configuration,
    Dataset,
    PowerSample,
    builtin_component_table,
    builtin_registry,
    load_dataset,
    save_dataset,
)
from .generalization import evaluate_generalization, ideal_scaling_factor
from .harness import run_experiment, summarize
from .knowledge import KnowledgeBase, extract_knowledge, load_knowledge_base, save_knowledge_base
from .metrics import mape, pearson_r
from .synthgen import SynthSpec, default_spec, generate_pair
from .trees import GbtHyperparams, fit_gbt, fit_linear_one_feature

__version__ = "0.1.0"

__all__ = [
    "ComponentDef",
    "Configuration",
    "Dataset",
    "FirePowerModel",
    "GbtHyperparams",
    "KnowledgeBase",
    "PowerSample",
    "SynthSpec",
    "build_target_model",
    "builtin_component_table",
    "builtin_registry",
    "default_spec",
    "evaluate_generalization",
    "extract_knowledge",
    "fit_gbt",
    "fit_linear_one_feature",
    "generate_pair",
    "ideal_scaling_factor",
    "load_dataset",
    "load_knowledge_base",
    "load_model",
    "mape",
    "pearson_r",
    "run_experiment",
    "save_dataset",
    "save_knowledge_base",
    "save_model",
    "summarize",
]
