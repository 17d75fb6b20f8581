"""hierlogic: fuzzy-logic losses and message-passing inference for
tree-structured label hierarchies.

The package turns a class hierarchy into three grounded rule families
(composition, decomposition, exclusion), relaxes them into differentiable
losses with analytic gradients, and provides a logic-induced inference pass
(tree message passing plus root-to-leaf path decoding) that makes any
per-node scorer's output hierarchy-consistent.
"""

from ._kernels import active_backend_name, available_backends
from .fixtures import FIXTURE_NAMES, load_fixture
from .fuzzy import FuzzyConfig, exists, forall, implication, negation, t_conorm, t_norm
from .hierarchy import (
    Hierarchy,
    HierarchyError,
    HierarchyParseError,
    HierarchyValidationError,
    Node,
    ancestor_closure,
    build_hierarchy,
    enumerate_paths,
    load_hierarchy,
    parse_hierarchy,
)
from .inference import (
    InferenceConfig,
    PathPrediction,
    c_message,
    d_message,
    decode_path,
    e_message,
    message_passing_step,
    run_inference,
)
from .metrics import EvalReport, evaluate, evaluate_leaves, violation_rate
from .rules import (
    LabelMap,
    LossReport,
    RuleSet,
    ScoreMap,
    bce_loss,
    c_loss,
    d_loss,
    derive_rules,
    e_loss,
    total_loss,
)
from .trainer import (
    DatasetSpec,
    LinearLogicModel,
    SyntheticDataset,
    TrainConfig,
    TrainingDiverged,
    generate_corrupted_scores,
    generate_dataset,
    standard_suite_config,
    standard_suite_spec,
    train,
    training_step_grads,
)

__version__ = "0.1.0"

__all__ = [
    "FIXTURE_NAMES",
    "DatasetSpec",
    "EvalReport",
    "FuzzyConfig",
    "Hierarchy",
    "HierarchyError",
    "HierarchyParseError",
    "HierarchyValidationError",
    "InferenceConfig",
    "LabelMap",
    "LinearLogicModel",
    "LossReport",
    "Node",
    "PathPrediction",
    "RuleSet",
    "ScoreMap",
    "SyntheticDataset",
    "TrainConfig",
    "TrainingDiverged",
    "active_backend_name",
    "ancestor_closure",
    "available_backends",
    "bce_loss",
    "build_hierarchy",
    "c_loss",
    "c_message",
    "d_loss",
    "d_message",
    "decode_path",
    "derive_rules",
    "e_loss",
    "e_message",
    "enumerate_paths",
    "evaluate",
    "evaluate_leaves",
    "exists",
    "forall",
    "generate_corrupted_scores",
    "generate_dataset",
    "implication",
    "load_fixture",
    "load_hierarchy",
    "message_passing_step",
    "negation",
    "parse_hierarchy",
    "run_inference",
    "standard_suite_config",
    "standard_suite_spec",
    "t_conorm",
    "t_norm",
    "total_loss",
    "train",
    "training_step_grads",
    "violation_rate",
]
