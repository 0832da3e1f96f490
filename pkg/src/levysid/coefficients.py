"""Sparse recovery of drift and diffusion coefficients.

Small increments (|x - z| < eps) carry the continuous part of the motion.
Scaled one-step increments regress onto the basis dictionary for the
drift; second moments, after subtracting the small-jump contribution
S_ij(eps), regress the same way for the diffusion matrix.  A cross-
validated hard-thresholding loop sparsifies each dense least-squares
solution.

All large regressions run through a blocked QR accumulator so that the
full design matrix is never materialized; fold-wise (R, Q^T B) summaries
make cross-validation exact and cheap.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary, evaluate_design_matrix
from .jump import AnnulusConfig, JumpEstimate, estimate_jump
from .simulate import PairDataset
from .stable import levy_kernel_constant, unit_sphere_area

__all__ = [
    "FilteredDataset",
    "BiasCorrection",
    "IdentifiedSystem",
    "SparsifyOptions",
    "CvReport",
    "StageError",
    "filter_small_increments",
    "bias_correction",
    "least_squares_solve",
    "estimate_drift",
    "estimate_diffusion",
    "sparsify_cv",
    "identify",
]

_BLOCK_ROWS = 500_000


class StageError(RuntimeError):
    """Pipeline failure carrying the stage where it occurred."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class FilteredDataset:
    """Rows of a PairDataset whose increment magnitude is below epsilon."""

    Z_hat: np.ndarray
    X_hat: np.ndarray
    M_hat: int
    M: int
    epsilon: float
    h: float

    @property
    def n(self) -> int:
        return self.Z_hat.shape[1]

    @property
    def retention(self) -> float:
        return self.M_hat / self.M


def filter_small_increments(data: PairDataset, epsilon: float) -> FilteredDataset:
    """Keep exactly the rows with |x - z| < epsilon, preserving order."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    keep = np.linalg.norm(data.X - data.Z, axis=1) < epsilon
    m_hat = int(keep.sum())
    if m_hat == 0:
        raise ValueError("no continuous-part samples; epsilon too small or h too large")
    return FilteredDataset(
        Z_hat=data.Z[keep],
        X_hat=data.X[keep],
        M_hat=m_hat,
        M=data.M,
        epsilon=epsilon,
        h=data.h,
    )


@dataclass
class BiasCorrection:
    """Small-jump contribution S_ij(eps) to the second increment moment."""

    S: np.ndarray

    def entry(self, i: int, j: int) -> float:
        return float(self.S[i, j])


def bias_correction(
    alpha_hat: float, sigma_hat: float, epsilon: float, n: int
) -> BiasCorrection:
    """Closed-form S_ij(eps) for the isotropic stable kernel.

    Diagonal entries are (D_n / n) sigma^alpha c(n, alpha) eps^(2 - alpha)
    / (2 - alpha); off-diagonal entries vanish by symmetry.  sigma = 0
    gives S = 0 (no jump component).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be nonnegative")
    if sigma_hat == 0:
        return BiasCorrection(np.zeros((n, n)))
    if not 0.0 < alpha_hat < 2.0:
        raise ValueError(
            f"alpha_hat = {alpha_hat} outside (0, 2); the correction is singular "
            "(Gaussian-only data should use sigma_hat = 0)"
        )
    diag = (
        unit_sphere_area(n)
        / n
        * sigma_hat**alpha_hat
        * levy_kernel_constant(n, alpha_hat)
        * epsilon ** (2.0 - alpha_hat)
        / (2.0 - alpha_hat)
    )
    return BiasCorrection(np.eye(n) * diag)


def least_squares_solve(A, B):
    """Minimum-norm least-squares minimizer of ||A c - B||_2.

    Computed via orthogonal factorization (SVD-backed lstsq), never the
    normal equations.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if not np.isfinite(A).all() or not np.isfinite(B).all():
        raise ValueError("non-finite values in least-squares inputs")
    solution, _, _, _ = np.linalg.lstsq(A, B, rcond=None)
    return solution


class RegressionAccumulator:
    """Streaming QR summaries of a tall regression, partitioned into folds.

    Rows are assigned to folds round-robin.  Each fold f keeps the triangular
    factor R_f, the projected right-hand sides D_f = Q_f^T B_f, and the
    residual offsets rho2_f = ||B_f||^2 - ||D_f||^2, which suffice for exact
    fits and validation errors on any column subset.
    """

    def __init__(self, K: int, p: int, folds: int = 1):
        if folds < 1:
            raise ValueError("folds must be >= 1")
        self.K, self.p, self.folds = K, p, folds
        self.R = [np.zeros((K, K)) for _ in range(folds)]
        self.D = [np.zeros((K, p)) for _ in range(folds)]
        self.rho2 = [np.zeros(p) for _ in range(folds)]
        self.m = [0] * folds
        self._row_offset = 0

    def add(self, A_blk: np.ndarray, B_blk: np.ndarray):
        A_blk = np.atleast_2d(A_blk)
        B_blk = np.asarray(B_blk, dtype=float).reshape(A_blk.shape[0], self.p)
        idx = (np.arange(A_blk.shape[0]) + self._row_offset) % self.folds
        self._row_offset += A_blk.shape[0]
        for f in range(self.folds):
            rows = idx == f if self.folds > 1 else slice(None)
            a, b = A_blk[rows], B_blk[rows]
            if a.shape[0] == 0:
                continue
            stack_a = np.vstack([self.R[f], a])
            stack_b = np.vstack([self.D[f], b])
            q, r = np.linalg.qr(stack_a)
            d = q.T @ stack_b
            self.rho2[f] += np.einsum("ij,ij->j", stack_b, stack_b) - np.einsum(
                "ij,ij->j", d, d
            )
            self.R[f], self.D[f] = r, d
            self.m[f] += a.shape[0]

    def _combine(self, folds):
        stack_a = np.vstack([self.R[f] for f in folds])
        stack_b = np.vstack([self.D[f] for f in folds])
        q, r = np.linalg.qr(stack_a)
        d = q.T @ stack_b
        rho2 = sum(self.rho2[f] for f in folds) + (
            np.einsum("ij,ij->j", stack_b, stack_b) - np.einsum("ij,ij->j", d, d)
        )
        return r, d, rho2

    def combined(self):
        return self._combine(range(self.folds))

    def train(self, leave_out: int):
        folds = [f for f in range(self.folds) if f != leave_out]
        r, d, _ = self._combine(folds)
        return r, d

    def total_rows(self) -> int:
        return sum(self.m)

    def fit(self, column: int, support, R=None, D=None) -> np.ndarray:
        """Least-squares fit of one RHS column restricted to a support."""
        if R is None or D is None:
            R, D, _ = self.combined()
        support = np.asarray(support, dtype=int)
        coeffs = np.zeros(self.K)
        if support.size:
            coeffs[support] = least_squares_solve(R[:, support], D[:, column])
        return coeffs

    def validation_sse(self, fold: int, column: int, coeffs: np.ndarray) -> float:
        resid = self.R[fold] @ coeffs - self.D[fold][:, column]
        return float(resid @ resid + self.rho2[fold][column])

    def residual_sse(self, column: int, coeffs: np.ndarray) -> float:
        R, D, rho2 = self.combined()
        resid = R @ coeffs - D[:, column]
        return float(resid @ resid + rho2[column])


def _default_thresholds() -> np.ndarray:
    return np.logspace(-4.0, 0.0, 25)


@dataclass(frozen=True)
class SparsifyOptions:
    folds: int = 5
    thresholds: tuple = tuple(_default_thresholds())
    enabled: bool = True


@dataclass
class CvReport:
    thresholds: np.ndarray
    supports: list
    cv_mean: np.ndarray
    cv_se: np.ndarray
    chosen_support: np.ndarray
    chosen_score: float


def _threshold_path(acc: RegressionAccumulator, column: int, dense, thresholds):
    """Supports visited by hard thresholding along an ascending tau grid.

    Each tau starts from the previous refit and only removes entries, so
    support size is non-increasing in tau.
    """
    R, D, _ = acc.combined()
    coeffs = dense.copy()
    support = np.flatnonzero(np.ones_like(dense, dtype=bool))
    path = []
    for tau in thresholds:
        while True:
            mags = np.abs(coeffs[support])
            if mags.size == 0:
                break
            keep = mags >= tau * mags.max()
            new_support = support[keep]
            if new_support.size == support.size:
                break
            support = new_support
            coeffs = acc.fit(column, support, R, D)
        path.append(support.copy())
    return path


def _cv_select(acc: RegressionAccumulator, column: int, candidates):
    """Score candidate supports by K-fold CV; pick the sparsest within one SE.

    The one-standard-error rule is applied to the paired fold-wise score
    differences against the best support: the validation noise is common to
    all supports, so the paired SE is what actually resolves them.
    """
    folds = acc.folds
    trains = [acc.train(f) for f in range(folds)]
    scores = np.empty((len(candidates), folds))
    for i, support in enumerate(candidates):
        for f, (r, d) in enumerate(trains):
            coeffs = acc.fit(column, support, r, d)
            scores[i, f] = acc.validation_sse(f, column, coeffs) / max(acc.m[f], 1)
    means = scores.mean(axis=1)
    best = int(np.argmin(means))
    deltas = scores - scores[best]
    ses = deltas.std(axis=1, ddof=1) / np.sqrt(folds)
    # With few folds the paired SE has heavy few-dof noise; a 3-SE cushion
    # keeps genuinely predictive terms while still pruning fluctuations,
    # whose deltas sit orders of magnitude below any true term's.
    admissible = [
        i for i in range(len(candidates)) if means[i] - means[best] <= 3.0 * ses[i]
    ]
    chosen = min(admissible, key=lambda i: (len(candidates[i]), means[i]))
    return chosen, means, ses


def _sparsify_column(acc: RegressionAccumulator, column: int, dense, thresholds):
    thresholds = np.sort(np.asarray(thresholds, dtype=float))
    path = _threshold_path(acc, column, dense, thresholds)
    candidates, seen = [], set()
    for support in path + [np.array([], dtype=int)]:
        key = tuple(support.tolist())
        if key not in seen:
            seen.add(key)
            candidates.append(support)
    if acc.folds > 1:
        chosen_idx, means, ses = _cv_select(acc, column, candidates)
    else:
        sses = np.array([acc.residual_sse(column, acc.fit(column, s)) for s in candidates])
        means, ses = sses / max(acc.total_rows(), 1), np.zeros(len(candidates))
        chosen_idx = int(np.argmin(means))
    support = candidates[chosen_idx]
    coeffs = acc.fit(column, support)
    if support.size == 0:
        warnings.warn("sparsifier selected the empty support; returning zero vector")
    report = CvReport(
        thresholds=thresholds,
        supports=candidates,
        cv_mean=means,
        cv_se=ses,
        chosen_support=support,
        chosen_score=float(means[chosen_idx]),
    )
    return coeffs, report


def _accumulate(
    fd: FilteredDataset, dictionary: Dictionary, rhs_fn, p: int, folds: int
) -> RegressionAccumulator:
    acc = RegressionAccumulator(dictionary.K, p, folds)
    for start in range(0, fd.M_hat, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, fd.M_hat)
        A_blk = evaluate_design_matrix(dictionary, fd.Z_hat[start:stop])
        acc.add(A_blk, rhs_fn(start, stop))
    return acc


def _drift_rhs(fd: FilteredDataset):
    scale = fd.retention / fd.h

    def rhs(start, stop):
        return scale * (fd.X_hat[start:stop] - fd.Z_hat[start:stop])

    return rhs


def _pair_indices(n: int):
    return [(i, j) for i in range(n) for j in range(i, n)]


def _diffusion_rhs(fd: FilteredDataset, corr: BiasCorrection):
    scale = fd.retention / fd.h
    pairs = _pair_indices(fd.n)

    def rhs(start, stop):
        inc = fd.X_hat[start:stop] - fd.Z_hat[start:stop]
        cols = [
            scale * inc[:, i] * inc[:, j] - corr.entry(i, j) for i, j in pairs
        ]
        return np.stack(cols, axis=1)

    return rhs


def _warn_if_underdetermined(fd: FilteredDataset, dictionary: Dictionary):
    if fd.M_hat < dictionary.K:
        warnings.warn(
            f"only {fd.M_hat} retained rows for {dictionary.K} basis entries; "
            "the fit is underdetermined"
        )


def estimate_drift(fd: FilteredDataset, dictionary: Dictionary) -> np.ndarray:
    """Dense drift coefficients: rows are components, columns basis entries."""
    _warn_if_underdetermined(fd, dictionary)
    acc = _accumulate(fd, dictionary, _drift_rhs(fd), fd.n, folds=1)
    R, D, _ = acc.combined()
    return least_squares_solve(R, D).T


def estimate_diffusion(
    fd: FilteredDataset, dictionary: Dictionary, corr: BiasCorrection
) -> dict:
    """Dense diffusion coefficients d_ij for i <= j, keyed by (i, j)."""
    _warn_if_underdetermined(fd, dictionary)
    pairs = _pair_indices(fd.n)
    acc = _accumulate(fd, dictionary, _diffusion_rhs(fd, corr), len(pairs), folds=1)
    R, D, _ = acc.combined()
    dense = least_squares_solve(R, D)
    return {pair: dense[:, c] for c, pair in enumerate(pairs)}


def sparsify_cv(A, B, dense_solution, folds: int = 5, threshold_grid=None):
    """Sparsify one dense least-squares solution by CV hard thresholding.

    Iteratively zeros coefficients below tau times the largest magnitude and
    refits on the survivors; supports along the tau grid (plus the empty
    support) are scored by K-fold cross validation and the sparsest support
    within one standard error of the best is refit on the full data.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    thresholds = _default_thresholds() if threshold_grid is None else threshold_grid
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0])
    dense = np.asarray(dense_solution, dtype=float)
    acc = RegressionAccumulator(A.shape[1], 1, folds)
    for start in range(0, A.shape[0], _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, A.shape[0])
        acc.add(A[start:stop], B[start:stop])
    return _sparsify_column(acc, 0, dense, thresholds)


@dataclass
class IdentifiedSystem:
    alpha_hat: float
    sigma_hat: float
    drift_coeffs: np.ndarray  # (n, K)
    diffusion_coeffs: dict  # {(i, j): (K,)} for i <= j
    dictionary: Dictionary
    jump: JumpEstimate
    correction: BiasCorrection
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.drift_coeffs.shape[0]

    def diffusion_matrix_at(self, points) -> np.ndarray:
        """Fitted a(x) at each point, shape (M, n, n)."""
        design = evaluate_design_matrix(self.dictionary, points)
        n = self.n
        out = np.zeros((design.shape[0], n, n))
        for (i, j), coeffs in self.diffusion_coeffs.items():
            vals = design @ coeffs
            out[:, i, j] = vals
            if i != j:
                out[:, j, i] = vals
        return out


def identify(
    data: PairDataset,
    dictionary: Dictionary,
    cfg: AnnulusConfig | None = None,
    options: SparsifyOptions | None = None,
) -> IdentifiedSystem:
    """Full pipeline: jump parameters, filtering, bias correction, sparse fits."""
    cfg = cfg or AnnulusConfig()
    options = options or SparsifyOptions()
    if dictionary.n != data.n:
        raise StageError("config", f"dictionary dimension {dictionary.n} != data dimension {data.n}")

    try:
        jump = estimate_jump(data, cfg)
    except ValueError as err:
        raise StageError("jump", str(err)) from err
    if not np.isfinite(jump.sigma_hat):
        raise StageError("jump", "sigma estimate undefined (alpha outside (0, 2))")

    try:
        fd = filter_small_increments(data, cfg.epsilon)
    except ValueError as err:
        raise StageError("filter", str(err)) from err

    try:
        corr = bias_correction(jump.alpha_hat, jump.sigma_hat, cfg.epsilon, data.n)
    except ValueError as err:
        raise StageError("bias-correction", str(err)) from err

    _warn_if_underdetermined(fd, dictionary)
    pairs = _pair_indices(data.n)
    n, K = data.n, dictionary.K
    folds = options.folds if options.enabled else 1

    def rhs(start, stop):
        drift = _drift_rhs(fd)(start, stop)
        diff = _diffusion_rhs(fd, corr)(start, stop)
        return np.hstack([drift, diff])

    try:
        acc = _accumulate(fd, dictionary, rhs, n + len(pairs), folds)
        R, D, rho2 = acc.combined()
        rank = np.linalg.matrix_rank(R)
        dense_all = least_squares_solve(R, D)
    except (ValueError, FloatingPointError) as err:
        raise StageError("regression", str(err)) from err

    diagnostics = {
        "M_hat": fd.M_hat,
        "retention": fd.retention,
        "condition": float(np.linalg.cond(R)),
        "rank_deficient": bool(rank < K),
        "residual_rms": {},
        "cv": {},
    }
    if diagnostics["rank_deficient"]:
        warnings.warn(
            f"design matrix rank {rank} < {K}; minimum-norm solutions returned"
        )

    drift = np.zeros((n, K))
    diffusion = {}
    try:
        for i in range(n):
            if options.enabled:
                coeffs, report = _sparsify_column(acc, i, dense_all[:, i], options.thresholds)
                diagnostics["cv"][f"b{i + 1}"] = report
            else:
                coeffs = dense_all[:, i]
            drift[i] = coeffs
            sse = acc.residual_sse(i, coeffs)
            diagnostics["residual_rms"][f"b{i + 1}"] = float(np.sqrt(sse / fd.M_hat))
        for c, (i, j) in enumerate(pairs):
            col = n + c
            if options.enabled:
                coeffs, report = _sparsify_column(acc, col, dense_all[:, col], options.thresholds)
                diagnostics["cv"][f"a{i + 1}{j + 1}"] = report
            else:
                coeffs = dense_all[:, col]
            diffusion[(i, j)] = coeffs
            sse = acc.residual_sse(col, coeffs)
            diagnostics["residual_rms"][f"a{i + 1}{j + 1}"] = float(np.sqrt(sse / fd.M_hat))
    except (ValueError, FloatingPointError) as err:
        raise StageError("sparsify", str(err)) from err

    system = IdentifiedSystem(
        alpha_hat=jump.alpha_hat,
        sigma_hat=jump.sigma_hat,
        drift_coeffs=drift,
        diffusion_coeffs=diffusion,
        dictionary=dictionary,
        jump=jump,
        correction=corr,
        diagnostics=diagnostics,
    )
    probe = fd.Z_hat[:: max(1, fd.M_hat // 2000)]
    eigs = np.linalg.eigvalsh(system.diffusion_matrix_at(probe))
    diagnostics["min_diffusion_eigenvalue"] = float(eigs.min())
    return system
