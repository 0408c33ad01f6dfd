"""Steady-state correspondence between sigmoidal ODE systems and
multistate discrete networks.

The library discretizes Hill systems into their limit networks,
enumerates discrete fixed points, locates and certifies continuous
steady states region by region, and bounds steady-state counts through
positive feedback vertex sets. The numeric kernels run on a compiled
extension when built, with a pure numpy fallback (see ssmap.backend).
"""

__version__ = "0.1.0"

from .backend import backend_name
from .correspondence import (
    ContractionCertificate,
    CorrespondenceReport,
    LimitPoint,
    RegionVerdict,
    SolverConfig,
    SteadyStateRecord,
    check_contraction,
    check_invariance,
    correspondence_report,
    find_steady_state,
    induced_network,
    limit_point,
    multi_start_roots,
    stability,
)
from .discrete import (
    PfvsResult,
    PhasePortrait,
    SignedCycle,
    SignedDigraph,
    fixed_points,
    min_pfvs,
    phase_portrait,
    positive_cycles,
    wiring_diagram_continuous,
    wiring_diagram_discrete,
)
from .errors import (
    DivergedOutsideCube,
    MarginTooLarge,
    ParseError,
    RangeViolationWarning,
    SemanticError,
    SsmapError,
    ThresholdMismatch,
    TooLarge,
    UndeclaredThreshold,
)
from .hill import (
    HillExpression,
    HillSystem,
    HillTerm,
    ProductTerm,
    eval_system,
    jacobian,
    sample_range_supremum,
)
from .modelfile import ModelDocument, derive_scheme, parse_model, serialize_model
from .regions import (
    Boundary,
    CompactBox,
    Cover,
    RegionBox,
    ThresholdScheme,
    build_cover,
    points_in_cover,
    region_box,
    region_of,
)
from .simulate import DiscreteOrbit, Trajectory, integrate_ode, iterate_discrete
from .spaces import MultistateNetwork, StateSpace

__all__ = [
    "__version__",
    "backend_name",
    "Boundary",
    "CompactBox",
    "ContractionCertificate",
    "CorrespondenceReport",
    "Cover",
    "DiscreteOrbit",
    "DivergedOutsideCube",
    "HillExpression",
    "HillSystem",
    "HillTerm",
    "LimitPoint",
    "MarginTooLarge",
    "ModelDocument",
    "MultistateNetwork",
    "ParseError",
    "PfvsResult",
    "PhasePortrait",
    "ProductTerm",
    "RangeViolationWarning",
    "RegionBox",
    "RegionVerdict",
    "SemanticError",
    "SignedCycle",
    "SignedDigraph",
    "SolverConfig",
    "SsmapError",
    "StateSpace",
    "SteadyStateRecord",
    "ThresholdMismatch",
    "ThresholdScheme",
    "TooLarge",
    "Trajectory",
    "UndeclaredThreshold",
    "build_cover",
    "check_contraction",
    "check_invariance",
    "correspondence_report",
    "derive_scheme",
    "eval_system",
    "find_steady_state",
    "fixed_points",
    "induced_network",
    "integrate_ode",
    "iterate_discrete",
    "jacobian",
    "limit_point",
    "min_pfvs",
    "multi_start_roots",
    "parse_model",
    "phase_portrait",
    "points_in_cover",
    "positive_cycles",
    "region_box",
    "region_of",
    "sample_range_supremum",
    "serialize_model",
    "stability",
    "wiring_diagram_continuous",
    "wiring_diagram_discrete",
]
