"""Static analysis of routed and mode-dependent dataflow specifications."""

from .model import (
    Actor,
    ActorKind,
    Channel,
    Const,
    ExecTime,
    ModeTable,
    Param,
    Spec,
    SpecError,
    Timing,
    Violation,
    load_spec,
    parse_spec,
    serialize_spec,
    substitute_mode,
    validate_structure,
)
from .rates import (
    NotGenerable,
    rate_init_from_consumption_sequence,
    rate_init_from_production_sequence,
    tokens_at_job,
)

__version__ = "0.1.0"
