"""Choosing which agents to correct in a network of classifiers that share opinions."""
from .aggregate import agg_perturbation_bound, gain_agg_closed, influence_scores, select_top_k_agg
from .dynamics import (
    DynamicsKind,
    DynamicsSpec,
    degroot_limit,
    finite_product,
    fj_finite_steps,
    fj_limit,
    influence_matrix,
    simulate_until_converged,
)
from .egal_exact import GreedyTrace, brute_force_opt_egal, delta_gain_exact, greedy_egal_exact
from .egal_group import (
    GroupPsiContext,
    GroupStructure,
    approx_delta_gain_group,
    delta_gain_group_oracle,
    gamma_hat,
    greedy_egal_appx_group,
    psi_xy,
    w_ambiguity_report,
)
from .egal_ind import (
    AmbiguityReport,
    PsiContext,
    ambiguity_report,
    approx_delta_gain_ind,
    delta_gain_ind_oracle,
    greedy_egal_appx_ind,
    psi,
)
from .errors import (
    CombinatorialBlowup,
    DimensionMismatch,
    NonConvergent,
    NotRowStochastic,
    SingularSystem,
    ValidationError,
)
from .generators import GraphSpec, InstanceSpec, adversarial_fixture, gen_graph, gen_group_instance, gen_instance
from .harness import accuracy, baseline_select, sweep
from .instance import (
    ErrorProfile,
    Instance,
    InterventionPlan,
    Outcome,
    apply_intervention,
    correctness,
    error_profile,
    expressed,
    faulty_mass,
    gain_agg_direct,
    gain_egal_direct,
)

__all__ = [
    "accuracy",
    "adversarial_fixture",
    "agg_perturbation_bound",
    "ambiguity_report",
    "AmbiguityReport",
    "apply_intervention",
    "approx_delta_gain_group",
    "approx_delta_gain_ind",
    "baseline_select",
    "brute_force_opt_egal",
    "CombinatorialBlowup",
    "correctness",
    "degroot_limit",
    "delta_gain_exact",
    "delta_gain_group_oracle",
    "delta_gain_ind_oracle",
    "DimensionMismatch",
    "DynamicsKind",
    "DynamicsSpec",
    "error_profile",
    "ErrorProfile",
    "expressed",
    "faulty_mass",
    "finite_product",
    "fj_finite_steps",
    "fj_limit",
    "gain_agg_closed",
    "gain_agg_direct",
    "gain_egal_direct",
    "gamma_hat",
    "gen_graph",
    "gen_group_instance",
    "gen_instance",
    "GraphSpec",
    "greedy_egal_appx_group",
    "greedy_egal_appx_ind",
    "greedy_egal_exact",
    "GreedyTrace",
    "GroupPsiContext",
    "GroupStructure",
    "influence_matrix",
    "influence_scores",
    "Instance",
    "InstanceSpec",
    "InterventionPlan",
    "NonConvergent",
    "NotRowStochastic",
    "Outcome",
    "psi",
    "psi_xy",
    "PsiContext",
    "select_top_k_agg",
    "simulate_until_converged",
    "SingularSystem",
    "sweep",
    "ValidationError",
    "w_ambiguity_report",
]

__version__ = "0.1.0"
