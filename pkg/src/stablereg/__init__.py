"""Edge-stability witnesses and stable regularity partitions."""
from .graph import Graph, VertexSet, density, load_edge_list, dump_edge_list, read_graph, write_graph
from .witness import (HalfGraphWitness, SearchOutcome, SpecialTreeWitness, empirical_tree_bound,
                      find_half_graph, find_special_tree, max_half_graph_length, sauer_check,
                      tree_bound_from_k, vc_dimension)
from .excellence import (ExcellenceOracle, WitnessFamily, brute_force_excellent, excellent_wrt,
                         find_split_witness, is_good, opinion, set_opinion)
from .params import ParameterError, make_params, theorem_bound
from .regularity import (ImplementationError, PartitionReport, brute_force_regular, pair_uniformity,
                         verify_partition, zeta_of)
from .partition import (DepthCapExceeded, PipelineError, RefinementError, distribute_remainder,
                        extract_excellent, greedy_cover, random_refine, stable_partition, tsr_partition)

__version__ = "0.1.0"
