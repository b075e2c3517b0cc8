"""optilang: natural-language operations research pipeline.

Turns validated model YAML documents into abstract models with a data
contract, binds datasets into concrete LP/MILP instances, solves them
with triaged reference backends, and reports solutions. LLM generation
and edit of model documents run through a validation/repair pipeline
with pluggable completion backends.
"""

from .documents import (
    DocumentError,
    ModelDocument,
    SchemaViolation,
    diff_documents,
    parse_model_yaml,
    serialize_model_yaml,
)
from .modeling import (
    AbstractModel,
    BindingError,
    ConcreteModel,
    ContractError,
    DataSet,
    bind_data,
    build_abstract,
    check_contract,
)
from .solve import SolveOutcome, SolverLimits, Status, solve
from .validate import ValidationReport, validate_pipeline

__version__ = "0.1.0"

__all__ = [
    "AbstractModel",
    "BindingError",
    "ConcreteModel",
    "ContractError",
    "DataSet",
    "DocumentError",
    "ModelDocument",
    "SchemaViolation",
    "SolveOutcome",
    "SolverLimits",
    "Status",
    "ValidationReport",
    "bind_data",
    "build_abstract",
    "check_contract",
    "diff_documents",
    "parse_model_yaml",
    "serialize_model_yaml",
    "solve",
    "validate_pipeline",
]
