"""Command line interface for mapcone."""

from __future__ import annotations

import sys
import time
from pathlib import Path
from typing import TYPE_CHECKING, Any

import click
import numpy as np
from rich.console import Console
from rich.pretty import Pretty
from rich.table import Table

from mapcone import __version__, hakye
from mapcone.config import ConfigLoadError, RunConfig
from mapcone.core import (
    DIM,
    DIM2,
    DomainError,
    LinearMapM3,
    identity_map,
    min_eigenvalue,
    partial_transpose,
    transpose_map,
)
from mapcone.localequiv import classify_matrix, decide_local_equivalence, rows_moduli_equal_oracle
from mapcone.logging import DEBUG, INFO, configure_logging, get_logger
from mapcone.matrixio import MatrixFormatError, dump_matrix, load_density_matrix, load_matrix, load_payload
from mapcone.positivity import (
    is_ppt,
    pairing_criterion,
    product_min,
    separable_sample,
    witness_apply,
)
from mapcone.report import Report, inputs_digest, persist_report
from mapcone.suite import VerificationSuite

if TYPE_CHECKING:
    from collections.abc import Callable

logger = get_logger(__name__)

EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2

type Outcome = tuple[dict[str, Any], dict[str, bool]]


class State:
    """Application state holding global configuration."""

    config: RunConfig


pass_state = click.make_pass_decorator(State, ensure=True)


class MapSpec(click.ParamType):
    """A named map: ``identity``, ``transpose``, ``hakye:<t>`` or a 9x9 Choi matrix JSON file."""

    name = "map"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> LinearMapM3:  # noqa: ANN401
        """Parse the map name or read the Choi matrix file."""
        if isinstance(value, LinearMapM3):
            return value
        if value == "identity":
            return identity_map()
        if value == "transpose":
            return transpose_map()
        kind, _, argument = str(value).partition(":")
        if kind == "hakye" and argument:
            try:
                return hakye.hakye_map(float(argument))
            except (ValueError, DomainError) as e:
                self.fail(f"invalid Ha-Kye parameter {argument!r}: {e}", param, ctx)
        path = Path(str(value))
        if path.is_file():
            try:
                return LinearMapM3.from_choi(load_matrix(path, (DIM2, DIM2)))
            except (MatrixFormatError, DomainError) as e:
                self.fail(f"invalid Choi matrix file {path}: {e}", param, ctx)
        self.fail(f"unknown map {value!r}; use identity, transpose, hakye:<t> or a Choi matrix file", param, ctx)


def run_options[F: Callable[..., Any]](command: F) -> F:
    """Add the options shared by every computing command."""
    options = [
        click.option("--seed", type=int, envvar="MAPCONE_SEED", help="Root random seed."),
        click.option("--restarts", type=int, envvar="MAPCONE_RESTARTS", help="Search restarts."),
        click.option("--tol-eigen", type=float, envvar="MAPCONE_TOL_EIGEN", help="Eigenvalue tolerance."),
        click.option("--tol-bp", type=float, envvar="MAPCONE_TOL_BP", help="Block-positivity tolerance."),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Report file; stdout when omitted."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _resolve(state: State, run: dict[str, Any]) -> RunConfig:
    return state.config.with_overrides(
        {
            "seed": run.get("seed"),
            "search.restarts": run.get("restarts"),
            "tolerances.eigen": run.get("tol_eigen"),
            "tolerances.block_positivity": run.get("tol_bp"),
            "output": run.get("out"),
        },
    )


def _execute(
    state: State,
    command: str,
    run: dict[str, Any],
    inputs: Callable[[], dict[str, Any]],
    compute: Callable[[RunConfig], Outcome],
) -> Report:
    """Resolve config, run the computation, persist the report and exit with its code."""
    started = time.perf_counter()
    try:
        config = _resolve(state, run)
        payload = inputs()
        results, checks = compute(config)
    except (DomainError, MatrixFormatError, ConfigLoadError) as e:
        logger.error("%s: %s", command, e)  # noqa: TRY400
        sys.exit(EXIT_INPUT_ERROR)

    report = Report(
        command=command,
        config=config.model_dump(mode="json"),
        inputs=payload,
        inputs_digest=inputs_digest(payload),
        results=results,
        checks=checks,
        wall_clock=time.perf_counter() - started,
    )
    persist_report(report, config.output)
    logger.info("%s finished in %.2fs", command, report.wall_clock)
    if not report.passed:
        sys.exit(EXIT_VIOLATION)
    return report


def _complex(vector: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vector).reshape(-1)]


@click.group()
@click.option(
    "--config",
    "-c",
    type=click.Path(exists=True, path_type=Path),
    help="Path to configuration file.",
)
@click.option(
    "--debug",
    is_flag=True,
    help="Enable debug logging.",
)
@click.version_option(version=__version__, prog_name="mapcone")
@pass_state
def main(state: State, *, config: Path | None, debug: bool = False) -> None:
    """mapcone - Choi matrices, positive maps and local-equivalence certificates on M3."""
    configure_logging(level=DEBUG if debug else INFO)
    try:
        state.config = RunConfig.from_path_or_default(config)
    except ConfigLoadError:
        logger.exception("Failed to load application config")
        sys.exit(EXIT_INPUT_ERROR)


@main.group(name="config")
def config_group() -> None:
    """Config management operations."""


@config_group.command()
@pass_state
def show(state: State) -> None:
    """Display the loaded config."""
    Console().print(
        Pretty(
            state.config,
            expand_all=True,
        ),
    )


@main.command()
@click.option("--t", "t", type=float, required=True, help="Ha-Kye parameter in [0, 1).")
@run_options
@pass_state
def choi(state: State, *, t: float, **run: Any) -> None:
    """Print the Choi matrix of the Ha-Kye map."""

    def compute(config: RunConfig) -> Outcome:  # noqa: ARG001
        matrix = hakye.choi_hakye(t)
        params = hakye.coefficients(t)
        return {
            "choi": dump_matrix(matrix),
            "coefficients": {"a": params.a, "b": params.b, "c": params.c},
        }, {}

    _execute(state, "choi", run, lambda: {"t": t}, compute)


@main.command()
@click.option("--t", "t", type=float, required=True, help="Ha-Kye parameter in [0, 1).")
@click.option("--in", "matrix_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, help="3x3 matrix JSON.")
@run_options
@pass_state
def apply(state: State, *, t: float, matrix_path: Path, **run: Any) -> None:
    """Apply the Ha-Kye map to a 3x3 matrix."""

    def compute(config: RunConfig) -> Outcome:  # noqa: ARG001
        x = load_matrix(matrix_path, (DIM, DIM))
        return {"image": dump_matrix(hakye.apply_hakye(t, x))}, {}

    _execute(
        state,
        "apply",
        run,
        lambda: {"t": t, "X": dump_matrix(load_matrix(matrix_path, (DIM, DIM)))},
        compute,
    )


@main.command()
@click.option("--in", "matrix_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, help="9x9 Hermitian matrix JSON.")
@run_options
@pass_state
def blockpos(state: State, *, matrix_path: Path, **run: Any) -> None:
    """Minimize the Choi matrix over product vectors."""

    def compute(config: RunConfig) -> Outcome:
        verdict = product_min(
            load_matrix(matrix_path, (DIM2, DIM2)),
            restarts=config.search.restarts,
            max_iters=config.search.max_iters,
            tol=config.search.convergence,
            seed=config.seed,
            workers=config.search.workers,
        )
        results = verdict.to_json()
        return results, {"block_positive": verdict.min_value >= -config.tolerances.block_positivity}

    _execute(
        state,
        "blockpos",
        run,
        lambda: {"C": dump_matrix(load_matrix(matrix_path, (DIM2, DIM2)))},
        compute,
    )


@main.command()
@click.option("--phi", type=MapSpec(), required=True, help="identity, transpose, hakye:<t> or a 9x9 Choi matrix JSON file.")
@click.option("--B", "b_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="3x3 matrix JSON; identity when omitted.")
@click.option("--rho", "rho_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, help="9x9 density matrix JSON.")
@run_options
@pass_state
def witness(
    state: State,
    *,
    phi: LinearMapM3,
    b_path: Path | None,
    rho_path: Path,
    **run: Any,
) -> None:
    """Evaluate the entanglement witness of a positive map on a state."""

    def b_matrix() -> np.ndarray:
        return np.eye(DIM) if b_path is None else load_matrix(b_path, (DIM, DIM))

    def compute(config: RunConfig) -> Outcome:
        rho = load_density_matrix(rho_path)
        value = witness_apply(phi, b_matrix(), rho)
        criterion = pairing_criterion(phi, b_matrix(), rho, seed=config.seed, tol=config.tolerances.eigen)
        return {
            "min_eigenvalue": value,
            "min_pairing": criterion.min_pairing,
            "pairing_directions": criterion.directions,
        }, {"nonnegative": value >= -config.tolerances.eigen, "pairing_agrees": criterion.agree}

    def inputs() -> dict[str, Any]:
        return {
            "phi": dump_matrix(phi.choi),
            "B": dump_matrix(b_matrix()),
            "rho": dump_matrix(load_density_matrix(rho_path).matrix),
        }

    _execute(state, "witness", run, inputs, compute)


@main.command()
@click.option("--rho", "rho_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, help="9x9 density matrix JSON.")
@run_options
@pass_state
def ppt(state: State, *, rho_path: Path, **run: Any) -> None:
    """Test a density matrix for a positive partial transpose."""

    def compute(config: RunConfig) -> Outcome:
        rho = load_density_matrix(rho_path)
        smallest = min_eigenvalue(partial_transpose(rho.matrix))
        result = is_ppt(rho, config.tolerances.eigen)
        return {"ppt": result, "min_eig": smallest}, {"ppt": result}

    _execute(
        state,
        "ppt",
        run,
        lambda: {"rho": dump_matrix(load_density_matrix(rho_path).matrix)},
        compute,
    )


@main.command()
@click.option("--t", "t", type=float, required=True, help="Ha-Kye parameter in [0, 1).")
@run_options
@pass_state
def singular(state: State, *, t: float, **run: Any) -> None:
    """List the families of vectors with singular compression."""

    def compute(config: RunConfig) -> Outcome:  # noqa: ARG001
        families = [family.to_json() for family in hakye.singular_y_families(t)]
        ratios = [float(r) for r in hakye.zero_face_ratios(t)]
        return {"families": families, "zero_face_ratios": ratios}, {}

    _execute(state, "singular", run, lambda: {"t": t}, compute)


@main.command()
@click.option("--t", "t", type=float, required=True, help="Ha-Kye parameter in [0, 1).")
@click.option("--family", "family_id", type=click.Choice([f.value for f in hakye.Family]), required=True)
@click.option("--phases", type=float, nargs=3, default=(0.0, 0.0, 0.0), help="Phases of y.")
@run_options
@pass_state
def kernel(
    state: State,
    *,
    t: float,
    family_id: str,
    phases: tuple[float, float, float],
    **run: Any,
) -> None:
    """Return the kernel vector of a singular compression."""

    def compute(config: RunConfig) -> Outcome:
        singular_family = hakye.family(t, family_id)
        y = singular_family.vector(phases)
        x = hakye.kernel_x(t, singular_family, phases)
        residual = float(np.linalg.norm(hakye.compression(t, y) @ x))
        return {"y": _complex(y), "x": _complex(x), "residual": residual}, {
            "kernel": residual <= config.tolerances.eigen,
        }

    _execute(
        state,
        "kernel",
        run,
        lambda: {"t": t, "family": family_id, "phases": list(phases)},
        compute,
    )


@main.command(name="local-equiv")
@click.option("--t1", type=float, required=True, help="First Ha-Kye parameter.")
@click.option("--t2", type=float, required=True, help="Second Ha-Kye parameter.")
@click.option("--numeric", is_flag=True, help="Attach the numerical search residual.")
@run_options
@pass_state
def local_equiv(state: State, *, t1: float, t2: float, numeric: bool, **run: Any) -> None:
    """Decide local equivalence of two Ha-Kye Choi matrices."""

    def compute(config: RunConfig) -> Outcome:
        verdict = decide_local_equivalence(
            t1,
            t2,
            numeric=numeric,
            restarts=config.search.restarts,
            phase_samples=config.oracle.phase_samples,
            seed=config.seed,
            workers=config.search.workers,
        )
        results = verdict.to_json()
        results["residual"] = verdict.numeric_residual
        return results, {"certified": verdict.certified}

    _execute(state, "local-equiv", run, lambda: {"t1": t1, "t2": t2, "numeric": numeric}, compute)


@main.command(name="moduli-classify")
@click.option("--in", "matrix_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, help="Square matrix JSON.")
@run_options
@pass_state
def moduli_classify(state: State, *, matrix_path: Path, **run: Any) -> None:
    """Classify the rows of a square matrix by their modulus functions."""

    def load() -> np.ndarray:
        payload = load_payload(matrix_path)
        return load_matrix(matrix_path, (payload.rows, payload.rows))

    def compute(config: RunConfig) -> Outcome:
        matrix = load()
        results = classify_matrix(matrix).to_json()
        results["oracle_rows_moduli_equal"] = rows_moduli_equal_oracle(
            matrix, config.oracle.phase_samples, config.seed
        )
        return results, {}

    _execute(state, "moduli-classify", run, lambda: {"X": dump_matrix(load())}, compute)


@main.command(name="sample-separable")
@click.option("--k", "k", type=int, default=4, show_default=True, help="Number of product terms.")
@run_options
@pass_state
def sample_separable(state: State, *, k: int, **run: Any) -> None:
    """Draw a random separable density matrix."""

    def compute(config: RunConfig) -> Outcome:
        spec, rho = separable_sample(k, config.seed)
        return {
            "rho": dump_matrix(rho.matrix),
            "weights": list(spec.weights),
            "factors": [{"x": _complex(f.x), "y": _complex(f.y)} for f in spec.factors],
        }, {"ppt": is_ppt(rho, config.tolerances.eigen)}

    _execute(state, "sample-separable", run, lambda: {"k": k}, compute)


@main.command(name="verify-paper")
@run_options
@pass_state
def verify_paper(state: State, **run: Any) -> None:
    """Run the full verification suite."""

    def compute(config: RunConfig) -> Outcome:
        results = VerificationSuite.from_config(config.verify).run(config.seed)
        _print_summary(results)
        return {"checks": [r.to_json() for r in results]}, {r.name: r.passed for r in results}

    _execute(state, "verify-paper", run, dict, compute)


def _print_summary(results: list[Any]) -> None:
    table = Table(title="verify-paper")
    table.add_column("check")
    table.add_column("result")
    for result in results:
        table.add_row(result.name, "[green]pass[/green]" if result.passed else "[red]FAIL[/red]")
    Console(stderr=True).print(table)


if __name__ == "__main__":
    main()
