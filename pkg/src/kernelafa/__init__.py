"""Additive feature attributions as closed-form kernel-weighted least squares."""

from .game import (
    AdditivityCertificate,
    CoalitionGame,
    grand_gap,
    is_additive,
    make_game,
    marginal_to_grand,
)
from .kernels import (
    SymmetricKernel,
    builtin_kernels,
    concave_kernel,
    custom_kernel,
    es_kernel,
    exp_kernel,
    fesp_kernel,
    linear_kernel,
    parse_kernel,
    scale_kernel,
    shap_kernel,
    shap_kernel_original,
    simplified_exp_kernel,
    uniform_kernel,
    weight_of,
)
from .models import (
    AdditiveModel,
    Dataset,
    InteractionModel,
    LinearModel,
    estimate_value_function,
    feature_means,
    load_dataset_csv,
    load_game_json,
    load_model_json,
    predict,
)
from .reference import (
    es,
    fesp_raw,
    linear_model_attribution,
    ls_prenucleolus_oracle,
    shapley,
    shapley_permutation_oracle,
)
from .solver import (
    Attribution,
    SolverDiagnostics,
    solve_constrained,
    solve_unconstrained,
    wls_oracle_constrained,
    wls_oracle_unconstrained,
)

__version__ = "0.1.0"
