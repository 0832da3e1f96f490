"""Command-line interface.

Subcommands: simulate, estimate, identify, reproduce, sweep.  Exit codes:
0 success, 1 estimation failure, 2 I/O or configuration failure.  Every
command echoes its resolved configuration into the output metadata so runs
can be reproduced bit-exactly from their artifacts.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .coefficients import SparsifyOptions, StageError, identify
from .dictionary import load_dictionary_file, polynomial_dictionary
from .jump import AnnulusConfig, estimate_jump, sensitivity_sweep
from .models import BUILTIN_MODELS, get_model_info
from .report import (
    write_coefficient_table,
    write_jump_report,
    write_keyvalue,
    write_sweep_csv,
)
from .reproduce import run_example
from .rng import RngStream
from .simulate import InitialSampler, generate_pairs, load_dataset, save_dataset


class CountType(click.ParamType):
    """Integer counts accepted in scientific notation, e.g. 1e6."""

    name = "count"

    def convert(self, value, param, ctx):
        try:
            number = float(value)
        except ValueError:
            self.fail(f"{value!r} is not a number", param, ctx)
        if number < 1 or number != int(number):
            self.fail(f"{value!r} is not a positive integer", param, ctx)
        return int(number)


COUNT = CountType()


def _parse_int_list(text):
    return [int(part) for part in text.split(",") if part.strip()]


def _parse_float_list(text):
    return [float(part) for part in text.split(",") if part.strip()]


def _annulus(epsilon, m, n_bands):
    try:
        return AnnulusConfig(epsilon=epsilon, m=m, N=n_bands)
    except ValueError as err:
        raise click.UsageError(str(err))


def _load(path):
    if not Path(path).exists():
        click.echo(f"error: input file not found: {path}", err=True)
        sys.exit(2)
    try:
        return load_dataset(path)
    except (OSError, ValueError) as err:
        click.echo(f"error: cannot read dataset {path}: {err}", err=True)
        sys.exit(2)


def _warn_epsilon(epsilon, h):
    if epsilon < 100.0 * h:
        click.echo(
            f"warning: epsilon = {epsilon} should greatly exceed h = {h}", err=True
        )


@click.group()
def main():
    """Identify SDEs with Brownian and alpha-stable Levy noise from pair data."""


@main.command()
@click.option("--model", required=True, type=click.Choice(sorted(BUILTIN_MODELS)))
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--sigma", type=float, default=2.0, show_default=True)
@click.option("--h", type=float, default=1e-3, show_default=True)
@click.option("--M", "m_count", type=COUNT, default=1_000_000, show_default=True)
@click.option("--grid", default=None, help="comma-separated per-axis counts; overrides --M")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def simulate(model, alpha, sigma, h, m_count, grid, seed, out):
    """Generate a one-step pair dataset from a built-in model."""
    info = get_model_info(model)
    try:
        if grid is not None:
            counts = _parse_int_list(grid)
            sampler = InitialSampler("grid", list(info.default_bounds), counts)
        else:
            sampler = InitialSampler("uniform_box", list(info.default_bounds))
        sde = info.make(alpha, sigma)
        data = generate_pairs(sde, sampler, m_count, h, RngStream(seed))
    except (ValueError, MemoryError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    metadata = {
        "model": model,
        "alpha": alpha,
        "sigma": sigma,
        "seed": seed,
        "grid": grid or "",
    }
    save_dataset(data, out, metadata)
    click.echo(f"M = {data.M}, h = {h}, wrote {out}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--epsilon", type=float, default=1.0, show_default=True)
@click.option("--m", type=float, default=5.0, show_default=True)
@click.option("--N", "n_bands", type=int, default=2, show_default=True)
@click.option("--out", required=True, type=click.Path(), help="report path prefix")
def estimate(input_path, epsilon, m, n_bands, out):
    """Estimate the jump parameters (alpha, sigma) from a dataset."""
    data = _load(input_path)
    cfg = _annulus(epsilon, m, n_bands)
    _warn_epsilon(epsilon, data.h)
    try:
        est = estimate_jump(data, cfg)
    except ValueError as err:
        click.echo(f"error: [jump] {err}", err=True)
        sys.exit(1)
    config = {"input": input_path, "epsilon": epsilon, "m": m, "N": n_bands}
    write_jump_report(out, est, config)
    click.echo(f"alpha_hat = {est.alpha_hat:.4f}, sigma_hat = {est.sigma_hat:.4f}")


@main.command(name="identify")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--degree", type=int, default=None, help="polynomial dictionary degree")
@click.option("--dictionary", "dict_path", type=click.Path(), default=None,
              help="dictionary spec file, one expression per line")
@click.option("--epsilon", type=float, default=1.0, show_default=True)
@click.option("--m", type=float, default=5.0, show_default=True)
@click.option("--N", "n_bands", type=int, default=2, show_default=True)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--no-sparsify", is_flag=True, default=False)
@click.option("--out", required=True, type=click.Path(), help="report path prefix")
def identify_cmd(input_path, degree, dict_path, epsilon, m, n_bands, folds,
                 no_sparsify, out):
    """Run the full identification pipeline on a dataset."""
    data = _load(input_path)
    try:
        if dict_path is not None:
            dictionary = load_dictionary_file(dict_path, data.n)
        else:
            dictionary = polynomial_dictionary(data.n, degree if degree is not None else 3)
    except (OSError, ValueError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    cfg = _annulus(epsilon, m, n_bands)
    _warn_epsilon(epsilon, data.h)
    options = SparsifyOptions(folds=folds, enabled=not no_sparsify)
    try:
        system = identify(data, dictionary, cfg, options)
    except StageError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)

    prefix = Path(out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    config = {
        "input": input_path,
        "epsilon": epsilon,
        "m": m,
        "N": n_bands,
        "folds": folds,
        "sparsify": not no_sparsify,
        "dictionary": dict_path or f"polynomial degree {degree if degree is not None else 3}",
    }
    write_jump_report(f"{prefix}_jump", system.jump, config)
    for i in range(system.n):
        write_coefficient_table(
            f"{prefix}_drift_b{i + 1}.csv", dictionary.names, system.drift_coeffs[i]
        )
    for (i, j), coeffs in system.diffusion_coeffs.items():
        write_coefficient_table(
            f"{prefix}_diffusion_a{i + 1}{j + 1}.csv", dictionary.names, coeffs
        )
    diag = system.diagnostics
    write_keyvalue(
        f"{prefix}_diagnostics.txt",
        {
            "alpha_hat": system.alpha_hat,
            "sigma_hat": system.sigma_hat,
            "M_hat": diag["M_hat"],
            "retention": f"{diag['retention']:.6f}",
            "condition": f"{diag['condition']:.6g}",
            "rank_deficient": diag["rank_deficient"],
            "min_diffusion_eigenvalue": f"{diag['min_diffusion_eigenvalue']:.6g}",
            **{
                f"residual_rms.{k}": f"{v:.6g}"
                for k, v in diag["residual_rms"].items()
            },
            **{f"config.{k}": v for k, v in config.items()},
        },
    )
    report = {
        "alpha_hat": system.alpha_hat,
        "sigma_hat": system.sigma_hat,
        "basis": list(dictionary.names),
        "drift": {
            f"b{i + 1}": system.drift_coeffs[i].tolist() for i in range(system.n)
        },
        "diffusion": {
            f"a{i + 1}{j + 1}": coeffs.tolist()
            for (i, j), coeffs in system.diffusion_coeffs.items()
        },
        "diagnostics": {
            "M_hat": diag["M_hat"],
            "retention": diag["retention"],
            "condition": diag["condition"],
            "rank_deficient": diag["rank_deficient"],
            "min_diffusion_eigenvalue": diag["min_diffusion_eigenvalue"],
            "residual_rms": diag["residual_rms"],
        },
        "config": config,
    }
    with open(f"{prefix}_report.json", "w") as fh:
        json.dump(report, fh, indent=2)
    click.echo(
        f"alpha_hat = {system.alpha_hat:.4f}, sigma_hat = {system.sigma_hat:.4f}, "
        f"reports at {prefix}_*"
    )


@main.command()
@click.argument("example", type=click.IntRange(1, 4))
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--sigma", type=float, default=2.0, show_default=True)
@click.option("--M", "m_count", type=COUNT, default=None)
@click.option("--grid", default=None, help="comma-separated per-axis counts")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epsilon", type=float, default=1.0, show_default=True)
@click.option("--outdir", required=True, type=click.Path())
def reproduce(example, alpha, sigma, m_count, grid, seed, epsilon, outdir):
    """Reproduce benchmark EXAMPLE (1-4): simulate, identify, compare."""
    try:
        result = run_example(
            example,
            alpha,
            sigma=sigma,
            M=m_count,
            grid=_parse_int_list(grid) if grid else None,
            seed=seed,
            annulus=AnnulusConfig(epsilon=epsilon),
            outdir=outdir,
        )
    except StageError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)
    except (ValueError, MemoryError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    for check in result.checks:
        status = "PASS" if check.passed else "FAIL"
        click.echo(f"{status} {check.name}: {check.detail}")
    click.echo(f"reports in {outdir}")
    if not result.all_passed:
        sys.exit(1)


@main.command()
@click.option("--model", required=True, type=click.Choice(sorted(BUILTIN_MODELS)))
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--sigma", type=float, default=2.0, show_default=True)
@click.option("--eps-list", "eps_list", required=True, help="comma-separated epsilons")
@click.option("--h-list", "h_list", required=True, help="comma-separated time steps")
@click.option("--M", "m_count", type=COUNT, default=1_000_000, show_default=True)
@click.option("--m", type=float, default=5.0, show_default=True)
@click.option("--N", "n_bands", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def sweep(model, alpha, sigma, eps_list, h_list, m_count, m, n_bands, seed, out):
    """Sensitivity of the alpha estimate over an (epsilon, h) grid."""
    info = get_model_info(model)
    try:
        eps_values = _parse_float_list(eps_list)
        h_values = _parse_float_list(h_list)
        sde = info.make(alpha, sigma)
        sampler = InitialSampler("uniform_box", list(info.default_bounds))
        result = sensitivity_sweep(
            sde,
            sampler,
            eps_values,
            h_values,
            _annulus(1.0, m, n_bands),
            m_count,
            RngStream(seed),
        )
    except ValueError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    write_sweep_csv(out, result)
    write_keyvalue(
        str(out) + ".meta",
        {
            "model": model,
            "alpha": alpha,
            "sigma": sigma,
            "eps_list": eps_list,
            "h_list": h_list,
            "M": m_count,
            "m": m,
            "N": n_bands,
            "seed": seed,
        },
    )
    failures = int(np.sum(~np.isfinite(result.alpha)))
    click.echo(f"wrote {out} ({failures} failed cells marked NA)")


if __name__ == "__main__":
    main()
