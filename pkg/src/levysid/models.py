"""Built-in benchmark systems.

Four reference jump-diffusion systems with known drift, diffusion and noise
parameters: a 1-D double-well, the 2-D Maier-Stein model, the 3-D Lorenz
system and a 1-D gene regulatory circuit with rational coefficients.  Each
carries its conventional simulation domain, a default basis dictionary and
(where the truth is expressible in that dictionary) the true coefficient
tables used by the comparison reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dictionary import Dictionary, custom_dictionary, polynomial_dictionary
from .simulate import SdeModel

__all__ = ["ModelInfo", "BUILTIN_MODELS", "get_model_info", "make_model"]


@dataclass(frozen=True)
class ModelInfo:
    name: str
    n: int
    make: Callable[[float, float], SdeModel] = field(repr=False)
    default_bounds: tuple
    make_dictionary: Callable[[], Dictionary] = field(repr=False)
    # true_drift_coeffs: (n, K); true_diffusion_coeffs: {(i, j): (K,)} for i <= j.
    # None when the truth is not expressible in the default dictionary.
    true_drift_coeffs: tuple | None = None
    true_diffusion_coeffs: dict | None = None
    true_drift_fn: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, repr=False
    )
    true_diffusion_fn: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, repr=False
    )

    def dictionary(self) -> Dictionary:
        return self.make_dictionary()


def _double_well_drift(x):
    return 4.0 * x - x**3


def _double_well_factory(alpha, sigma):
    return SdeModel(
        n=1,
        drift=_double_well_drift,
        diffusion_factor=lambda x: (1.0 + x)[:, :, None],
        levy_intensity=sigma,
        levy_alpha=alpha,
        name="double_well_1d",
    )


def _maier_stein_drift(x):
    x1, x2 = x[:, 0], x[:, 1]
    return np.stack(
        [x1 - x1**3 - 5.0 * x1 * x2**2, -(1.0 + x1**2) * x2], axis=1
    )


def _maier_stein_factor(x):
    x1, x2 = x[:, 0], x[:, 1]
    lam = np.zeros((x.shape[0], 2, 2))
    lam[:, 0, 0] = 1.0 + x2
    lam[:, 0, 1] = 1.0
    lam[:, 1, 1] = x1
    return lam


def _maier_stein_factory(alpha, sigma):
    return SdeModel(
        n=2,
        drift=_maier_stein_drift,
        diffusion_factor=_maier_stein_factor,
        levy_intensity=sigma,
        levy_alpha=alpha,
        name="maier_stein_2d",
    )


def _lorenz_drift(x):
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
    return np.stack(
        [10.0 * (-x1 + x2), 4.0 * x1 - x2 - x1 * x3, -8.0 / 3.0 * x3 + x1 * x2],
        axis=1,
    )


def _lorenz_factor(x):
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
    lam = np.zeros((x.shape[0], 3, 3))
    lam[:, 0, 0] = 1.0 + x3
    lam[:, 0, 1] = 1.0
    lam[:, 1, 1] = x2
    lam[:, 2, 2] = x1
    return lam


def _lorenz_factory(alpha, sigma):
    return SdeModel(
        n=3,
        drift=_lorenz_drift,
        diffusion_factor=_lorenz_factor,
        levy_intensity=sigma,
        levy_alpha=alpha,
        name="lorenz_3d",
    )


# Gene regulatory circuit: rate constants k_f = 6, K_d = 10, k_d = 1,
# basal production 0.4.
def _gene_drift(x):
    return 6.0 * x**2 / (x**2 + 10.0) - x + 0.4


def _gene_diffusion(x):
    return x**2 / (x**2 + 0.5)


def _gene_factory(alpha, sigma):
    return SdeModel(
        n=1,
        drift=_gene_drift,
        diffusion_factor=lambda x: (x / np.sqrt(x**2 + 0.5))[:, :, None],
        levy_intensity=sigma,
        levy_alpha=alpha,
        name="gene_regulatory_1d",
    )


GENE_DICTIONARY_EXPRESSIONS = (
    "1",
    "x",
    "x^2",
    "x^3",
    "sin(x)",
    "cos(11*x)",
    "sin(11*x)",
    "-10*tanh(10*x)^2+10",
    "-10*tanh(10*x-10)^2+10",
    "exp(-50*x^2)",
    "exp(-50*(x-3)^2)",
    "exp(-0.3*x^2)",
    "exp(-0.3*(x-3)^2)",
    "exp(-2*(x-2)^2)",
    "exp(-50*(x-4)^2)",
    "exp(-0.6*(x-4)^2)",
    "exp(-0.6*(x-3)^2)",
    "-2*tanh(2*x-4)^2+2",
    "tanh(x-4)^2+1",
)


def _coeffs(K, entries):
    vec = np.zeros(K)
    for k, value in entries.items():
        vec[k] = value
    return vec


_DW_K = 7
_MS_K = 10
_LZ_K = 10

BUILTIN_MODELS = {
    "double_well_1d": ModelInfo(
        name="double_well_1d",
        n=1,
        make=_double_well_factory,
        default_bounds=((-3.0, 3.0),),
        make_dictionary=lambda: polynomial_dictionary(1, 6),
        true_drift_coeffs=(tuple(_coeffs(_DW_K, {1: 4.0, 3: -1.0})),),
        true_diffusion_coeffs={(0, 0): tuple(_coeffs(_DW_K, {0: 1.0, 1: 2.0, 2: 1.0}))},
        true_drift_fn=_double_well_drift,
        true_diffusion_fn=lambda x: (1.0 + x) ** 2,
    ),
    "maier_stein_2d": ModelInfo(
        name="maier_stein_2d",
        n=2,
        make=_maier_stein_factory,
        default_bounds=((-2.0, 2.0), (-2.0, 2.0)),
        make_dictionary=lambda: polynomial_dictionary(2, 3),
        true_drift_coeffs=(
            tuple(_coeffs(_MS_K, {1: 1.0, 6: -1.0, 8: -5.0})),
            tuple(_coeffs(_MS_K, {2: -1.0, 7: -1.0})),
        ),
        true_diffusion_coeffs={
            (0, 0): tuple(_coeffs(_MS_K, {0: 2.0, 2: 2.0, 5: 1.0})),
            (0, 1): tuple(_coeffs(_MS_K, {1: 1.0})),
            (1, 1): tuple(_coeffs(_MS_K, {3: 1.0})),
        },
    ),
    "lorenz_3d": ModelInfo(
        name="lorenz_3d",
        n=3,
        make=_lorenz_factory,
        default_bounds=((-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)),
        make_dictionary=lambda: polynomial_dictionary(3, 2),
        true_drift_coeffs=(
            tuple(_coeffs(_LZ_K, {1: -10.0, 2: 10.0})),
            tuple(_coeffs(_LZ_K, {1: 4.0, 2: -1.0, 6: -1.0})),
            tuple(_coeffs(_LZ_K, {3: -8.0 / 3.0, 5: 1.0})),
        ),
        true_diffusion_coeffs={
            (0, 0): tuple(_coeffs(_LZ_K, {0: 2.0, 3: 2.0, 9: 1.0})),
            (0, 1): tuple(_coeffs(_LZ_K, {2: 1.0})),
            (0, 2): tuple(_coeffs(_LZ_K, {})),
            (1, 1): tuple(_coeffs(_LZ_K, {7: 1.0})),
            (1, 2): tuple(_coeffs(_LZ_K, {})),
            (2, 2): tuple(_coeffs(_LZ_K, {4: 1.0})),
        },
    ),
    "gene_regulatory_1d": ModelInfo(
        name="gene_regulatory_1d",
        n=1,
        make=_gene_factory,
        default_bounds=((0.0, 5.0),),
        make_dictionary=lambda: custom_dictionary(GENE_DICTIONARY_EXPRESSIONS, 1),
        true_drift_fn=_gene_drift,
        true_diffusion_fn=_gene_diffusion,
    ),
}


def get_model_info(name: str) -> ModelInfo:
    try:
        return BUILTIN_MODELS[name]
    except KeyError:
        raise KeyError(
            f"unknown model {name!r}; choose from {sorted(BUILTIN_MODELS)}"
        ) from None


def make_model(name: str, alpha: float, sigma: float = 2.0) -> SdeModel:
    return get_model_info(name).make(alpha, sigma)
