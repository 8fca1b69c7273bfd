"""Constructive regularity and uniformity partitions for permutations,
pattern counting, and quasirandomness diagnostics."""

from .core import (ContractError, DominanceTable, IndexSet, Interval,
                   ParameterError, ParseError, PermError, Permutation,
                   ResourceLimitError, build_dominance, format_permutation,
                   generate, parse_permutation)
from .counting import (OmegaForm, SimplexSpec, compare_under_smoothing,
                       estimate_pattern_count, omega_integral, simplex_integral)
from .density import (StepCDF, cdf_L, convolve_smooth, density, eps_near,
                      identity_cdf, lipschitz_modulus, pair_count)
from .patterns import (ConcentrationFamily, DeletionSet, Pattern,
                       concentration_intervals, count_all_patterns,
                       count_pattern, count_pattern_naive, destroy_pattern,
                       longest_monotone_subsequence, pseudomonotone_subset,
                       scatter_property, universality_check, verify_destroyed)
from .quasirand import (QuasirandomReport, discrepancy, discrepancy_star,
                        eigenvalue_stat, m_subseq_stat, quasirandom_report,
                        quasirandom_via_uniformity, separability_stat,
                        translation_stat, two_subseq_stat)
from .regularity import (EquitablePartition, RefinePolicy, RegularityReport,
                         equitable_partition, exploit_irregular, index_q,
                         is_regular_pair, is_regular_partition,
                         refine_step, regular_partition)
from .uniformity import (UniformPartition, UniformityError, uniform_partition,
                         verify_uniform)

__version__ = "0.1.0"
