"""Constrained serial rule: random assignment with weak preferences under
arbitrary linear constraints, computed exactly over the rationals."""

from .audit import (
    check_no_improvement,
    check_promises,
    envy_report,
    is_constrained_ordinally_efficient,
    same_type,
)
from .lottery import Lottery, bvn_decompose, constrained_decompose
from .mechanism import MechanismConfig, MechanismResult, TraceLevel, build_round_lp, find_bottleneck, run
from .model import (
    Assignment,
    Constraint,
    ConstraintSystem,
    Instance,
    Promise,
    Sense,
    WeakOrder,
    cumulative,
    sd_compare,
    top_classes,
    validate_instance,
)
from .oracles import eps_reference, ps_eating

__version__ = "0.1.0"

__all__ = [
    "Assignment", "Constraint", "ConstraintSystem", "Instance", "Lottery", "MechanismConfig",
    "MechanismResult", "Promise", "Sense", "TraceLevel", "WeakOrder", "build_round_lp",
    "bvn_decompose", "check_no_improvement", "check_promises", "constrained_decompose",
    "cumulative", "envy_report", "eps_reference", "find_bottleneck",
    "is_constrained_ordinally_efficient", "ps_eating", "run", "same_type", "sd_compare",
    "top_classes", "validate_instance",
]
