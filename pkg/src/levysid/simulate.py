"""One-step Euler simulation of jump-diffusion SDEs.

Generates paired datasets (Z, X) where each row x_j is the image of z_j
after one Euler step of size h under

    dx = b(x) dt + Lambda(x) dB_t + sigma dL_t,

with dL_t an isotropic alpha-stable increment.  Datasets persist as CSV
with a key-value metadata sidecar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rng import RngStream
from .stable import sample_rotsym_stable_increment

__all__ = [
    "SdeModel",
    "PairDataset",
    "InitialSampler",
    "euler_step",
    "generate_pairs",
    "generate_trajectory_pairs",
    "save_dataset",
    "load_dataset",
]


@dataclass
class SdeModel:
    """A jump-diffusion model with additive isotropic stable noise.

    ``drift`` maps an (M, n) array of states to (M, n) drift values;
    ``diffusion_factor`` maps it to (M, n, n) matrices Lambda(x).  The
    Levy part is additive: constant intensity ``levy_intensity`` and
    stability exponent ``levy_alpha``.
    """

    n: int
    drift: Callable[[np.ndarray], np.ndarray]
    diffusion_factor: Callable[[np.ndarray], np.ndarray]
    levy_intensity: float = 0.0
    levy_alpha: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.levy_intensity < 0:
            raise ValueError("levy_intensity must be nonnegative")
        if not 0.0 < self.levy_alpha < 2.0:
            raise ValueError("levy_alpha must lie in (0, 2)")


@dataclass
class PairDataset:
    """M one-step sample pairs: row j of X is the time-h image of row j of Z."""

    Z: np.ndarray
    X: np.ndarray
    h: float

    def __post_init__(self):
        self.Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if self.Z.shape != self.X.shape:
            raise ValueError(f"Z and X shapes differ: {self.Z.shape} vs {self.X.shape}")
        if self.h <= 0:
            raise ValueError("time step h must be positive")
        if self.Z.shape[0] < 1:
            raise ValueError("dataset must contain at least one pair")

    @property
    def M(self) -> int:
        return self.Z.shape[0]

    @property
    def n(self) -> int:
        return self.Z.shape[1]


@dataclass
class InitialSampler:
    """Initial-point sampler: uniform over a box, or a full lattice.

    ``bounds`` is a list of (low, high) per axis.  In grid mode the number
    of points is the product of ``grid_counts`` and the requested M is
    ignored.
    """

    mode: str
    bounds: list
    grid_counts: list | None = None
    max_points: int = 50_000_000

    def __post_init__(self):
        if self.mode not in ("uniform_box", "grid"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        for lo, hi in self.bounds:
            if not lo <= hi:
                raise ValueError(f"invalid bound ({lo}, {hi})")
        if self.mode == "grid":
            if self.grid_counts is None or len(self.grid_counts) != len(self.bounds):
                raise ValueError("grid mode needs one grid count per axis")
            if any(c < 1 for c in self.grid_counts):
                raise ValueError("grid counts must be positive")

    @property
    def n(self) -> int:
        return len(self.bounds)

    def draw(self, M: int, rng: RngStream) -> np.ndarray:
        if self.mode == "uniform_box":
            lo = np.array([b[0] for b in self.bounds])
            hi = np.array([b[1] for b in self.bounds])
            return rng.generator.uniform(lo, hi, size=(M, self.n))
        total = int(np.prod(self.grid_counts))
        if total > self.max_points:
            raise MemoryError(
                f"grid of {total} points exceeds the configured budget of "
                f"{self.max_points}; reduce grid counts or raise max_points"
            )
        axes = [
            np.linspace(lo, hi, c)
            for (lo, hi), c in zip(self.bounds, self.grid_counts)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def _check_finite(values: np.ndarray, label: str):
    bad = ~np.isfinite(values.reshape(values.shape[0], -1)).all(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise FloatingPointError(f"{label} evaluated non-finite at row {row}")


def euler_step(model: SdeModel, z, h: float, rng: RngStream) -> np.ndarray:
    """One Euler step x = z + b(z) h + sqrt(h) Lambda(z) g + sigma L_h.

    Accepts a single state of length n or an (M, n) batch; the output has
    the same shape as the input.
    """
    if h <= 0:
        raise ValueError("time step h must be positive")
    z_arr = np.asarray(z, dtype=float)
    single = z_arr.ndim == 1
    zb = np.atleast_2d(z_arr)
    M, n = zb.shape
    if n != model.n:
        raise ValueError(f"state dimension {n} does not match model dimension {model.n}")

    b = np.asarray(model.drift(zb), dtype=float).reshape(M, n)
    _check_finite(b, "drift")
    lam = np.asarray(model.diffusion_factor(zb), dtype=float).reshape(M, n, n)
    _check_finite(lam, "diffusion factor")

    g = rng.generator.standard_normal((M, n))
    x = zb + b * h + np.sqrt(h) * np.einsum("mij,mj->mi", lam, g)
    if model.levy_intensity > 0:
        jumps = sample_rotsym_stable_increment(model.levy_alpha, h, n, rng, size=M)
        x = x + model.levy_intensity * jumps
    return x[0] if single else x


def generate_pairs(
    model: SdeModel, sampler: InitialSampler, M: int, h: float, rng: RngStream
) -> PairDataset:
    """Draw Z per the sampler and evolve each row one Euler step of size h."""
    if sampler.n != model.n:
        raise ValueError("sampler and model dimensions differ")
    if sampler.mode != "grid" and M < 1:
        raise ValueError("M must be >= 1")
    Z = sampler.draw(M, rng)
    X = euler_step(model, Z, h, rng)
    return PairDataset(Z, X, h)


def generate_trajectory_pairs(
    model: SdeModel, z0, steps: int, h: float, rng: RngStream
) -> PairDataset:
    """Chain Euler steps from z0 and form the overlapping one-step pairs.

    The Markov property makes consecutive states of a single trajectory
    valid (z, x(h)) pairs for the estimators.
    """
    if steps < 1:
        raise ValueError("need at least one step")
    z0 = np.asarray(z0, dtype=float).reshape(-1)
    traj = np.empty((steps + 1, model.n))
    traj[0] = z0
    for i in range(steps):
        traj[i + 1] = euler_step(model, traj[i], h, rng)
    return PairDataset(traj[:-1], traj[1:], h)


def save_dataset(data: PairDataset, path, metadata: dict | None = None):
    """Write the dataset as CSV (17 significant digits) plus a .meta sidecar."""
    n = data.n
    header = ",".join([f"z{i + 1}" for i in range(n)] + [f"x{i + 1}" for i in range(n)])
    table = np.hstack([data.Z, data.X])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=header, comments="")
    meta = {"h": repr(data.h), "n": n, "M": data.M}
    if metadata:
        meta.update(metadata)
    with open(str(path) + ".meta", "w") as fh:
        for key, value in meta.items():
            fh.write(f"{key} = {value}\n")


def load_dataset(path) -> PairDataset:
    """Read a dataset written by :func:`save_dataset`."""
    with open(path) as fh:
        header = fh.readline().strip()
    cols = header.split(",")
    if len(cols) % 2 != 0 or not cols[0].startswith("z"):
        raise ValueError(f"unrecognized dataset header in {path}: {header!r}")
    n = len(cols) // 2
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta = read_metadata(str(path) + ".meta")
    h = float(meta["h"])
    return PairDataset(table[:, :n], table[:, n:], h)


def read_metadata(path) -> dict:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    return meta
