"""Node importance under nonlinear recovery control and linear exact controllability."""
from .kernels import BACKEND_NAME
from .netio import (
    BipartiteNetwork,
    DirectedNetwork,
    NetworkKind,
    bipartite_to_adjacency,
    degrees,
    parse_edge_list,
    parse_incidence,
)
from .ranking import DegenerateRankingError, ImportanceRanking

__version__ = "0.1.0"
