"""Exact interventional SHAP, KernelSHAP and sound aggregation over extended
distributions, computed on finite discrete grids."""

from ._core import (
    CheckResult,
    CounterexampleReport,
    Dataset,
    DerivedSeriesReport,
    DeterminedCheck,
    DiscreteDistribution,
    FeatureSubset,
    Grid,
    KernelOperatorDecomposition,
    KernelShapConfig,
    KernelShapMode,
    KernelShapReport,
    LPProblem,
    LpSolution,
    LpStatus,
    SubsetMomentMatrix,
    subset_moment_matrix,
    OperatorMatrix,
    ShapOperators,
    ShapReport,
    SpectrumReport,
    TabularFunction,
    additive_function,
    aggregate_kernelshap,
    aggregate_shap,
    check_names,
    constant_function,
    derived_series,
    empirical_distribution,
    aggregate_limit_gap,
    extended_distribution,
    extended_support_basis,
    find_counterexample,
    hermitian_check,
    indicator_function,
    kernel_operator_decomposition,
    is_determined,
    is_product_distribution,
    kernelshap_limit,
    kernelshap_point,
    l1_l2_bound_check,
    marginal,
    pi_weights,
    product_function,
    reconstruct_determined,
    ring_support,
    run_checks,
    scramble_columns,
    shap_all,
    shap_operator_matrices,
    shap_value,
    solve_lp,
    spectrum_check,
    support_mask,
    uniform_on_mask,
    value_function,
    value_operator_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
