"""Temporal social network analysis toolkit.

Ingests interaction records (calls, SMS, blog comments), computes a
centrality measure matrix per time window, assigns roles from band
templates, extracts groups with fuzzy membership, and tracks entity and
group evolution with CUSUM change detection.
"""

__version__ = "0.1.0"

from .graph import (
    Interaction,
    InteractionStore,
    Kind,
    Snapshot,
    TimeWindow,
    neighbors,
    snapshot,
    window_series,
)
from .measures import (
    ALL_MEASURES,
    MeasureId,
    MeasureMatrix,
    SolverParams,
    measure_matrix,
    scale_to_bands,
)
from .roles import (
    Band,
    RoleAssignment,
    RoleSet,
    RoleTemplate,
    UNCLASSIFIED,
    assign_roles,
    load_role_templates,
    score_role,
    table1_roles,
)
from .groups import (
    Group,
    GroupMethod,
    GroupParams,
    Tier,
    TierThresholds,
    classify_membership,
    extract_groups,
    group_cohesion,
    group_stability,
    link_density,
    match_groups_across_windows,
    membership_strength,
)
from .dynamics import (
    ChangePoint,
    CusumParams,
    MeasureSeries,
    cusum_detect,
    measure_series,
    society_report,
)
from .pipeline import PipelineConfig, run_pipeline

__all__ = [name for name in dir() if not name.startswith("_")]
