"""Community detection on networks with nodal covariates.

Edges follow a stochastic block model; community membership given covariates
follows a multinomial logistic model. Detection runs in two stages: a convex
(SDP) relaxation solved by ADMM and rounded by k-means, then refinement by
mean-field variational EM or Poisson profile-likelihood coordinate ascent.
"""

from .datatypes import (
    BlockMatrix,
    Coefficients,
    Covariates,
    Graph,
    Labels,
    ModelParams,
    SoftLabels,
    align_labels,
    apply_permutation,
    inverse_permutation,
    permute_coefficients,
)
from .inference import (
    FitOptions,
    MplResult,
    VemResult,
    bruteforce_marginal_loglik,
    bruteforce_profile_argmax,
    elbo,
    labels_from_soft,
    mpl_fit,
    profile_objective,
    soft_from_labels,
    vem_fit,
)
from .logistic import LogitFit, fit_multilogistic, predict_probs, wald_test
from .metrics import ari, confusion, misclassification_rate, nmi
from .pipeline import ExperimentConfig, real_data_pipeline, run_pipeline, sweep_tuning
from .sdp import (
    KmeansResult,
    SdpConfig,
    SdpSolution,
    choose_lambda,
    kmeans,
    psd_project,
    sdp_init_labels,
    solve_sdp,
    spectral_cluster,
)
from .simulate import (
    ScenarioSpec,
    WeightedDigraph,
    preprocess_weighted_digraph,
    rep_rng,
    sample_model,
    sample_scenario,
    scenario_true_beta,
)

__version__ = "0.1.0"
