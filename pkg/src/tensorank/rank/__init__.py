from .bounds import (
    ConditionNotMet,
    CorollaryBound,
    CoverBound,
    OrderingBound,
    TightBound,
    corollary_bound,
    merge_reduction,
    ordering_sets,
    product_value,
    theorem1_bound,
    theorem1_bruteforce,
    theorem2_bound,
    theorem2_tight_bound,
    tight_value,
    tucker_rank_bound,
)
from .hitting import HCollection, H_key, enumerate_H, is_admissible
from .oracle import OracleResult, ntf_hals, oracle_nonneg_rank, unfolding_ranks
from .partition import (
    CIResult,
    ConditionalIndependenceFailed,
    Partition,
    build_partition,
    expected_merged_size,
    find_block,
    merge_blocks,
    merge_partition,
    parafac_from_partition,
    verify_conditional_independence,
)
from .report import RankBoundReport, rank_bound_report, witness_expansion

__all__ = [
    "CIResult",
    "ConditionNotMet",
    "ConditionalIndependenceFailed",
    "CorollaryBound",
    "CoverBound",
    "HCollection",
    "H_key",
    "OracleResult",
    "OrderingBound",
    "Partition",
    "RankBoundReport",
    "TightBound",
    "build_partition",
    "corollary_bound",
    "enumerate_H",
    "expected_merged_size",
    "find_block",
    "is_admissible",
    "merge_blocks",
    "merge_partition",
    "merge_reduction",
    "ntf_hals",
    "oracle_nonneg_rank",
    "ordering_sets",
    "parafac_from_partition",
    "product_value",
    "rank_bound_report",
    "theorem1_bound",
    "theorem1_bruteforce",
    "theorem2_bound",
    "theorem2_tight_bound",
    "tight_value",
    "tucker_rank_bound",
    "unfolding_ranks",
    "verify_conditional_independence",
    "witness_expansion",
]
