"""Euler stepping, initial samplers, and dataset round trips."""

import numpy as np
import pytest

from levysid import (
    InitialSampler,
    PairDataset,
    RngStream,
    SdeModel,
    euler_step,
    generate_pairs,
    generate_trajectory_pairs,
    load_dataset,
    save_dataset,
)
from levysid.simulate import read_metadata


def deterministic_model(n=1):
    return SdeModel(
        n=n,
        drift=lambda x: -2.0 * x,
        diffusion_factor=lambda x: np.zeros((x.shape[0], n, n)),
        levy_intensity=0.0,
    )


def test_euler_step_deterministic_part_exact():
    model = deterministic_model()
    z = np.array([[1.0], [-0.5], [2.0]])
    x = euler_step(model, z, 0.01, RngStream(0))
    assert np.allclose(x, z - 2.0 * z * 0.01)


def test_euler_step_single_state_shape():
    model = deterministic_model(2)
    model = SdeModel(
        n=2,
        drift=lambda x: np.zeros_like(x),
        diffusion_factor=lambda x: np.zeros((x.shape[0], 2, 2)),
    )
    out = euler_step(model, np.array([0.3, -0.7]), 0.1, RngStream(0))
    assert out.shape == (2,)
    assert np.allclose(out, [0.3, -0.7])


def test_euler_step_gaussian_covariance():
    lam = np.array([[1.0, 0.5], [0.0, 2.0]])
    model = SdeModel(
        n=2,
        drift=lambda x: np.zeros_like(x),
        diffusion_factor=lambda x: np.broadcast_to(lam, (x.shape[0], 2, 2)),
    )
    h = 0.25
    z = np.zeros((200_000, 2))
    x = euler_step(model, z, h, RngStream(42))
    cov = np.cov(x.T)
    assert np.allclose(cov, h * lam @ lam.T, atol=0.02)


def test_euler_step_heavy_tail_present():
    model = SdeModel(
        n=1,
        drift=lambda x: np.zeros_like(x),
        diffusion_factor=lambda x: np.zeros((x.shape[0], 1, 1)),
        levy_intensity=1.0,
        levy_alpha=0.8,
    )
    x = euler_step(model, np.zeros((100_000, 1)), 1e-3, RngStream(1))
    # With alpha < 1 and 1e5 draws some jumps far exceed the Gaussian scale.
    assert np.abs(x).max() > 1.0


def test_euler_step_validation():
    model = deterministic_model()
    with pytest.raises(ValueError, match="h must be positive"):
        euler_step(model, np.zeros((2, 1)), 0.0, RngStream(0))
    with pytest.raises(ValueError, match="dimension"):
        euler_step(model, np.zeros((2, 3)), 0.1, RngStream(0))


def test_non_finite_drift_reports_row():
    model = SdeModel(
        n=1,
        drift=lambda x: np.where(x > 0.5, np.inf, 0.0),
        diffusion_factor=lambda x: np.zeros((x.shape[0], 1, 1)),
    )
    with pytest.raises(FloatingPointError, match="drift .* row 1"):
        euler_step(model, np.array([[0.0], [1.0]]), 0.1, RngStream(0))


def test_model_validation():
    with pytest.raises(ValueError):
        SdeModel(n=0, drift=lambda x: x, diffusion_factor=lambda x: x)
    with pytest.raises(ValueError):
        SdeModel(
            n=1, drift=lambda x: x, diffusion_factor=lambda x: x, levy_intensity=-1.0
        )
    with pytest.raises(ValueError):
        SdeModel(
            n=1, drift=lambda x: x, diffusion_factor=lambda x: x,
            levy_intensity=1.0, levy_alpha=2.0,
        )


def test_uniform_sampler_bounds():
    sampler = InitialSampler("uniform_box", [(-2.0, 2.0), (0.0, 1.0)])
    pts = sampler.draw(10_000, RngStream(0))
    assert pts.shape == (10_000, 2)
    assert pts[:, 0].min() >= -2.0 and pts[:, 0].max() <= 2.0
    assert pts[:, 1].min() >= 0.0 and pts[:, 1].max() <= 1.0


def test_grid_sampler_lexicographic():
    sampler = InitialSampler("grid", [(0.0, 1.0), (0.0, 2.0)], [2, 3])
    pts = sampler.draw(0, RngStream(0))
    expected = np.array(
        [
            [0.0, 0.0], [0.0, 1.0], [0.0, 2.0],
            [1.0, 0.0], [1.0, 1.0], [1.0, 2.0],
        ]
    )
    assert np.allclose(pts, expected)


def test_grid_sampler_budget():
    sampler = InitialSampler("grid", [(0.0, 1.0)] * 3, [500, 500, 500])
    with pytest.raises(MemoryError, match="budget"):
        sampler.draw(0, RngStream(0))


def test_sampler_validation():
    with pytest.raises(ValueError, match="mode"):
        InitialSampler("lattice", [(0.0, 1.0)])
    with pytest.raises(ValueError, match="bound"):
        InitialSampler("uniform_box", [(1.0, 0.0)])
    with pytest.raises(ValueError, match="grid"):
        InitialSampler("grid", [(0.0, 1.0), (0.0, 1.0)], [5])


def test_generate_pairs_shapes_and_determinism():
    model = deterministic_model()
    sampler = InitialSampler("uniform_box", [(-1.0, 1.0)])
    a = generate_pairs(model, sampler, 500, 1e-2, RngStream(9))
    b = generate_pairs(model, sampler, 500, 1e-2, RngStream(9))
    assert a.M == 500 and a.n == 1
    assert np.array_equal(a.Z, b.Z) and np.array_equal(a.X, b.X)


def test_trajectory_pairs_chain():
    model = deterministic_model()
    data = generate_trajectory_pairs(model, [1.0], 50, 1e-2, RngStream(2))
    assert data.M == 50
    assert np.array_equal(data.Z[1:], data.X[:-1])
    assert data.Z[0, 0] == 1.0


def test_pair_dataset_validation():
    with pytest.raises(ValueError, match="shapes"):
        PairDataset(np.zeros((3, 1)), np.zeros((4, 1)), 0.1)
    with pytest.raises(ValueError, match="h must be positive"):
        PairDataset(np.zeros((3, 1)), np.zeros((3, 1)), 0.0)


def test_save_load_round_trip(tmp_path):
    model = deterministic_model()
    sampler = InitialSampler("uniform_box", [(-1.0, 1.0)])
    data = generate_pairs(model, sampler, 200, 1e-3, RngStream(4))
    path = tmp_path / "pairs.csv"
    save_dataset(data, path, {"note": "round-trip"})
    loaded = load_dataset(path)
    assert loaded.h == data.h
    assert np.array_equal(loaded.Z, data.Z)
    assert np.array_equal(loaded.X, data.X)
    meta = read_metadata(str(path) + ".meta")
    assert meta["note"] == "round-trip"
    assert int(meta["M"]) == 200


def test_save_is_deterministic(tmp_path):
    model = deterministic_model()
    sampler = InitialSampler("uniform_box", [(-1.0, 1.0)])
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    save_dataset(generate_pairs(model, sampler, 100, 1e-3, RngStream(6)), p1)
    save_dataset(generate_pairs(model, sampler, 100, 1e-3, RngStream(6)), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        load_dataset(path)
