"""Numerical lab for Gaussian-decay uniqueness of Schrodinger and heat evolutions."""
from .errors import *  # noqa: F401,F403
from .grid import (
    Field,
    Grid,
    Trajectory,
    apply_weight,
    boundary_ratio,
    containment_check,
    continuous_fourier,
    dft_forward,
    dft_inverse,
    gaussian_field,
    inner_product,
    make_field,
    make_grid,
    norm,
    spectral_gradient,
    spectral_laplacian,
)
from .operators import (
    GeneratorSpec,
    PotentialSpec,
    SkewSplit,
    apply_K,
    apply_S,
    build_potential,
    carleman_split,
    commutator_form,
    gaussian_split,
    phi_form,
    weighted_potential_bound,
)
from .propagator import (
    EvolutionParams,
    RegularizedFlowParams,
    duhamel_flow,
    evolve,
    free_flow,
    regularized_flow,
    split_step_flow,
)
from .weights import ParabolicWeight, WeightParams, mu
from .diagnostics import (
    decay_fit,
    frequency_functions,
    hardy_classify,
    lemma31_bound_check,
    lemma51_check,
    linear_weighted_norm,
    log_convexity_check,
    theorem3_interpolation_check,
    theorem51_check,
    weighted_grad_norm,
    weighted_norm,
)
from .appell import AppellParams, appell_field, appell_potential, appell_solution_residual, appell_source
from .carleman import (
    CarlemanParams,
    CutoffSpec,
    carleman_ratio_parabolic,
    carleman_ratio_schrodinger,
    cutoff_compose,
    weight_chi,
    weight_kappa,
    weight_sigma,
)

__version__ = "0.1.0"
