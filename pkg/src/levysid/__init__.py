"""Identification of SDEs driven by Brownian and alpha-stable Levy noise.

Library layout:

- :mod:`levysid.stable`: stable variates and isotropic stable increments
- :mod:`levysid.simulate`: Euler one-step pair generation and dataset IO
- :mod:`levysid.dictionary`: basis dictionaries (polynomial and expression)
- :mod:`levysid.jump`: annulus-count estimation of (alpha, sigma)
- :mod:`levysid.coefficients`: sparse drift/diffusion recovery
- :mod:`levysid.models`: built-in benchmark systems
- :mod:`levysid.reproduce`: end-to-end benchmark reproduction
- :mod:`levysid.cli`: command-line interface
"""

from .coefficients import (
    BiasCorrection,
    FilteredDataset,
    IdentifiedSystem,
    SparsifyOptions,
    StageError,
    bias_correction,
    estimate_diffusion,
    estimate_drift,
    filter_small_increments,
    identify,
    least_squares_solve,
    sparsify_cv,
)
from .dictionary import (
    Dictionary,
    custom_dictionary,
    evaluate_design_matrix,
    polynomial_dictionary,
)
from .jump import (
    AnnulusConfig,
    JumpEstimate,
    band_counts,
    estimate_alpha_sigma,
    estimate_jump,
    increment_radii,
    sensitivity_sweep,
)
from .models import BUILTIN_MODELS, get_model_info, make_model
from .reproduce import run_example
from .rng import RngStream
from .simulate import (
    InitialSampler,
    PairDataset,
    SdeModel,
    euler_step,
    generate_pairs,
    generate_trajectory_pairs,
    load_dataset,
    save_dataset,
)
from .stable import (
    StableParams,
    levy_kernel_constant,
    sample_rotsym_stable_increment,
    sample_stable,
    unit_sphere_area,
)

__version__ = "0.1.0"
