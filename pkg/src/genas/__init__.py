"""Evolutionary architecture search over plain convolutional networks."""

from .arch_compiler import (ArchKey, LayerSpec, Phenotype, canonical_key,
                            conv_layer_count, decode, describe, feature_shape,
                            layer_param_counts, out_dim, param_count, serialize,
                            to_wire)
from .data_tools import (ConfusionMatrix, Metrics, balanced_batches,
                         compute_metrics, confusion_from_predictions,
                         threshold_search)
from .evaluation import (EvaluationError, LineTransport, RemoteEvaluator,
                         SurrogateEvaluator, TrainConfig, surrogate_asymptote,
                         surrogate_series)
from .fitness import DEFAULT_WINDOW, FitnessCache, genas_wf, lookup_or_evaluate
from .genetic_ops import (CrossoverOutcome, GaConfig, Individual,
                          MutationOutcome, crossover, mutate, tournament_select)
from .orchestrator import (RunConfig, RunLog, RunResult, RunStateError,
                           finalize_architecture, fingerprint, iter_log,
                           load_checkpoint, load_config, run_search,
                           save_checkpoint)
from .search_space import (GENES_PER_CELL, Genome, InvalidGenomeError,
                           SearchSpace, random_genome, validate_genome)

__version__ = "0.1.0"

__all__ = [
    "ArchKey", "ConfusionMatrix", "CrossoverOutcome", "DEFAULT_WINDOW",
    "EvaluationError", "FitnessCache", "GENES_PER_CELL", "GaConfig", "Genome",
    "Individual", "InvalidGenomeError", "LayerSpec", "LineTransport",
    "Metrics", "MutationOutcome", "Phenotype", "RemoteEvaluator", "RunConfig",
    "RunLog", "RunResult", "RunStateError", "SearchSpace",
    "SurrogateEvaluator", "TrainConfig", "balanced_batches", "canonical_key",
    "compute_metrics", "confusion_from_predictions", "conv_layer_count",
    "crossover", "decode", "describe", "feature_shape",
    "finalize_architecture", "fingerprint", "genas_wf", "iter_log",
    "layer_param_counts", "load_checkpoint", "load_config",
    "lookup_or_evaluate", "mutate", "out_dim", "param_count", "random_genome",
    "run_search", "save_checkpoint", "serialize", "surrogate_asymptote",
    "surrogate_series", "threshold_search", "to_wire", "tournament_select",
    "validate_genome",
]
