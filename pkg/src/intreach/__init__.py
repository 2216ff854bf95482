"""Exact forward reach sets of multi-input integrator chains.

Support functions, parametric boundaries, implicit boundary equations and a
verification harness for systems in Brunovsky normal form.
"""

__version__ = "0.1.0"

from .boundary import BoundaryParams, BoundaryPoint, boundary_point, sample_sheet, sheet_seam_points  # noqa: E402
from .errors import (  # noqa: E402
    DegenerateBlockError,
    FaceNotVertexError,
    NonGenericLineError,
    NumericalError,
    ReachError,
    SpecError,
)
from .harness import (  # noqa: E402
    InputSchedule,
    containment_audit,
    mc_volume,
    overapprox_gap,
    random_cloud,
    simulate_endpoint,
)
from .implicit import (  # noqa: E402
    Membership,
    hankel_residual,
    implicit_poly,
    line_intersections,
    membership,
    rho_of_state,
)
from .model import BlockSpec, InputSet, SystemSpec, load_spec, normalize_spec  # noqa: E402
from .support import support, supporting_point  # noqa: E402
