"""Sublinear-resource hierarchical clustering toolkit."""

from .access import (
    QueryOracle,
    ResourceLedger,
    StreamEvent,
    parse_stream,
    replay_stream,
    stream_from_file,
    validate_stream,
    weight_class_bounds,
)
from .cluster import exact_hc, hc_via_sparsifier, recursive_hc, spectral_bisect
from .errors import (
    DomainError,
    OracleContractError,
    ProtocolViolation,
    RecoveryFailure,
    StreamFormatError,
)
from .graph import (
    Graph,
    HCTree,
    cost_cut_form,
    cost_edge_form,
    cost_split_form,
    cross_weight,
    cut_weight,
    hc_cost_lower_bound,
    load_graph,
    parse_edge_list,
    random_hc_tree,
    save_graph,
)
from .mpc import Machine, mpc_1round, mpc_2round, mpc_partition
from .sketch import (
    SketchConfig,
    VertexSketch,
    l0_extract,
    recover_sparsifier,
    sketch_graph,
    sketch_update,
)
from .sparsify import (
    EdgeSample,
    ExpanderGraph,
    SparsifyPlan,
    build_expander,
    edge_sampling_distribution,
    eps_delta_sparsify,
    pick_delta_for_hc,
    rejection_sample_edge,
    sparsify_core,
    weighted_sparsify,
)
from .streaming import stream_hc, stream_sparsify

__version__ = "0.1.0"
