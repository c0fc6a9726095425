"""oscilab: a spectral laboratory for oscillatory integral operators.

Evaluates linear and multilinear oscillatory integral operators on
periodic grids, decomposes amplitudes by frequency regime, measures
Lebesgue/Sobolev/Hardy/bmo norms, maximal functions and Carleson norms,
simulates coupled dispersive systems through the Duhamel formula, and
runs the sharpness / decay experiments exposed by the ``oscilab`` CLI.
"""

from .grid import (
    Field,
    Grid,
    apply_multiplier,
    band_limited_field,
    conj_field,
    constant_field,
    dilate_field,
    field_from_function,
    field_from_spectrum,
    make_grid,
    multiply_fields,
    philox_rng,
    random_field,
    sobolev_profile_field,
    transform,
)
from .phases import (
    Phase,
    builtin_phase,
    custom_phase,
    eval_phase,
    grad_phase,
    homogeneous_power,
    klein_gordon,
    scale_phase,
    verify_order_bounds,
    zero_phase,
)
from .cutoffs import BaseBump, CutoffFamily, base_bump, cutoff, lp_component
from .amplitudes import (
    DecomposedAmplitude,
    MultilinearAmplitude,
    bracket_power_amplitude,
    constant_amplitude,
    critical_order,
    critical_order_total,
    decompose_amplitude,
    seminorm_estimate,
    separable_amplitude,
)
from .operators import (
    BudgetExceededError,
    OperatorSpec,
    eval_linear_oio,
    eval_multilinear_oio,
    eval_paraproduct,
    free_propagator,
)
from .spaces import (
    DyadicMeasure,
    NormKind,
    bmo,
    carleson_embedding_check,
    carleson_norm,
    hl_maximal,
    lebesgue,
    local_hardy,
    norm,
    park_maximal,
    parse_norm_kind,
    peetre_maximal,
    sobolev,
    triebel_lizorkin,
)
from .dispersive import (
    EvolutionResult,
    SystemConfig,
    estimate_ratio_experiment,
    residual_check,
    scaling_check,
    solve_coupled_system,
    space_time_norm,
)
from .sharpness import (
    MiyachiProfile,
    SharpnessCase,
    blowup_experiment,
    build_miyachi_function,
    build_sharpness_amplitude,
    sharpness_case,
    square_function_check,
)
from .carleson import BandMeasureSpec, build_band_measure, decay_experiment
from .reporting import NormReport, RatioTable, emit_ratio_table, read_field_dump, write_field_dump

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
