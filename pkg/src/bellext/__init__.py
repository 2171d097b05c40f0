"""Classical extensions of quantum correlation data."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .probability import (  # noqa: F401
    PLUS_MINUS,
    TOL,
    ZERO_ONE,
    Distribution,
    MomentConstraints,
    VariableSet,
    condition,
    convert_domain,
    marginalize,
    moment,
    moments_to_distribution,
)
from .quantum import Context, PureState, YesNoObservable, expectation, joint_distribution, pauli, tensor  # noqa: F401
from .representability import (  # noqa: F401
    BchScenario,
    Interval,
    RepresentabilityReport,
    bch_check,
    bell_wigner_interval,
    fine_inequalities,
    lp_feasible,
    lp_interval,
)
from .scenarios import (  # noqa: F401
    Scenario,
    analyze_ghsz,
    build_ghsz_model,
    build_ghsz_scenario,
    build_hardy_scenario,
    build_singlet_scenario,
    builtin,
)
from .tree import CompatibilityGraph, GlueResult, extend_tree, glue, is_tree  # noqa: F401
