"""SRTR network representations, coprime factorizations and structured controllers."""

from ._core import (
    ClosedLoop,
    Domain,
    InfeasibleError,
    Lcf,
    PartitionedRealization,
    RiccatiSolution,
    SrtrError,
    SrtrPair,
    StateSpaceSystem,
    assemble_closed_loop,
    check_flcf,
    fixtures,
    kd_from_srtr,
    lcf_from_srtr,
    minimal_realization,
    mm_conditions,
    mm_solve,
    nrf_from_srtr,
    reduce_rows,
    simulate,
    solve_ctnare,
    sparsity_pattern,
    srtr_from_k,
    srtr_from_lcf,
    srtr_is_stable,
    to_output_normal,
    unstable_pole_count,
    verify_srtr_identity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
