"""Primitive sets of binary matrices and the synchronizing automata they induce."""
from .automata import (Dfa, associated_dfa, cerny_dfa, directing_exact, greedy_sync_word,
                       is_proper_dfa, is_synchronizing, make_proper, reset_threshold_exact,
                       sg_diameter, shortest_synchronizing_word, square_graph)
from .construction import (dom_perm, extract_perm_greedy, extract_perm_matching,
                           generate_proper_candidate)
from .errors import PrimsetError
from .families import build_a_ij, canonical_relabel, family_build, q1_q2, verify_family
from .harness import classify_primitivity_at_scale, run_experiment, threshold_bounds
from .matrix import BinaryMatrix, MatrixSet, classify, parse, serialize, word_product
from .primitivity import (exponent_bounds, exponent_exact, find_block_permutation_structure,
                          is_irreducible, is_primitive_nz, is_proper_primitive)
from .randgen import RngStream, procedure1, procedure2, sample_binary_set, sample_q_partition

__version__ = "0.1.0"
