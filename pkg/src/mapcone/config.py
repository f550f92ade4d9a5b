"""Configuration management for mapcone."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    model_validator,
)

from mapcone.logging import get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = Path.home() / ".config" / "mapcone" / "config.yaml"


class ConfigLoadError(Exception):
    """Raised when configuration cannot be loaded from a file."""

    @classmethod
    def from_path(cls, path: Path) -> ConfigLoadError:
        """Create error for failed load from specific path."""
        return cls(f"Could not load config from {path}")

    @classmethod
    def invalid_override(cls, key: str) -> ConfigLoadError:
        """Create error for an override naming an unknown setting."""
        return cls(f"Unknown configuration setting '{key}'")

    @classmethod
    def rejected_override(cls, error: ValidationError) -> ConfigLoadError:
        """Create error for overrides that fail validation."""
        fields = ", ".join(".".join(str(part) for part in item["loc"]) for item in error.errors())
        return cls(f"Invalid configuration value for {fields}")


def _t_grid(stop: float = 1.0) -> list[float]:
    return [round(0.05 * k, 2) for k in range(20) if 0.05 * k < stop]


class ToleranceConfig(BaseModel):
    """Numerical tolerances."""

    model_config = ConfigDict(frozen=True)

    eigen: PositiveFloat = Field(
        default=1e-9,
        description="Eigenvalue tolerance for positive semidefiniteness and PPT",
    )
    hermitian: PositiveFloat = Field(
        default=1e-10,
        description="Relative Frobenius tolerance for Hermiticity",
    )
    block_positivity: PositiveFloat = Field(
        default=1e-8,
        description="Product-vector minimum accepted as nonnegative",
    )
    residual: PositiveFloat = Field(
        default=1e-8,
        description="Relative residual accepted as an exact local equivalence",
    )


class SearchConfig(BaseModel):
    """Multi-start search settings shared by the block-positivity and equivalence searches."""

    model_config = ConfigDict(frozen=True)

    restarts: PositiveInt = Field(default=64, description="Independent random starts")
    max_iters: PositiveInt = Field(default=200, description="Iteration limit per start")
    convergence: PositiveFloat = Field(
        default=1e-12,
        description="Improvement below which a start counts as converged",
    )
    workers: PositiveInt = Field(default=1, description="Threads running starts")


class OracleConfig(BaseModel):
    """Randomized phase oracle settings."""

    model_config = ConfigDict(frozen=True)

    phase_samples: PositiveInt = Field(
        default=256,
        description="Phase tuples sampled by the moduli oracle",
    )


class ChoiCalculusCheckConfig(BaseModel):
    """Configuration for the Choi calculus check."""

    model_config = ConfigDict(frozen=True)

    instances: PositiveInt = Field(default=100, description="Random instances per identity")
    tolerance: PositiveFloat = Field(default=1e-10, description="Relative Frobenius tolerance")


class CoefficientIdentityCheckConfig(BaseModel):
    """Configuration for the Ha-Kye coefficient identity check."""

    model_config = ConfigDict(frozen=True)

    t_grid: list[float] = Field(default_factory=_t_grid, description="Parameters to check")
    tolerance: PositiveFloat = Field(default=1e-12, description="Absolute tolerance")


class DeterminantCalculusCheckConfig(BaseModel):
    """Configuration for the determinant cubic check."""

    model_config = ConfigDict(frozen=True)

    samples: PositiveInt = Field(default=1000, description="Random (t, y) samples")
    tolerance: PositiveFloat = Field(default=1e-10, description="Determinant tolerance")
    gradient_rtol: PositiveFloat = Field(
        default=1e-6,
        description="Relative tolerance of the finite-difference gradient",
    )


class SingularStructureCheckConfig(BaseModel):
    """Configuration for the singular family and kernel check."""

    model_config = ConfigDict(frozen=True)

    t_grid: list[float] = Field(
        default_factory=lambda: _t_grid(0.91)[::2],
        description="Parameters to check",
    )
    phase_draws: PositiveInt = Field(default=100, description="Phase draws per family")
    grid_steps: PositiveInt = Field(default=150, description="Simplex grid resolution")
    zero_threshold: PositiveFloat = Field(
        default=1e-8,
        description="Grid points with F below this must lie near a family",
    )
    distance: PositiveFloat = Field(
        default=1e-3,
        description="Allowed squared-moduli distance of a near-zero grid point from a family",
    )
    residual: PositiveFloat = Field(default=1e-9, description="Kernel residual tolerance")


class WitnessSanityCheckConfig(BaseModel):
    """Configuration for the witness sanity check."""

    model_config = ConfigDict(frozen=True)

    t_grid: list[float] = Field(
        default_factory=lambda: [0.0, 0.2, 0.4, 0.6, 0.8, 0.95],
        description="Parameters to check",
    )
    separable_samples: PositiveInt = Field(default=100, description="Separable states")
    random_b: PositiveInt = Field(default=20, description="Random B per state")
    restarts: PositiveInt = Field(default=16, description="Block-positivity restarts per t")
    tolerance: PositiveFloat = Field(default=1e-9, description="Eigenvalue tolerance")


class PptBaselineCheckConfig(BaseModel):
    """Configuration for the PPT baseline check."""

    model_config = ConfigDict(frozen=True)

    samples: PositiveInt = Field(default=100, description="Random separable states")
    tolerance: PositiveFloat = Field(default=1e-9, description="Eigenvalue tolerance")


class LocalInequivalenceCheckConfig(BaseModel):
    """Configuration for the local inequivalence check."""

    model_config = ConfigDict(frozen=True)

    t_values: list[float] = Field(
        default_factory=lambda: [0.0, 0.2, 0.4, 0.6, 0.8],
        description="Parameters compared pairwise",
    )
    numeric_pairs: list[tuple[float, float]] = Field(
        default_factory=lambda: [(0.2, 0.5), (0.0, 0.4), (0.6, 0.8)],
        description="Unequal pairs corroborated by the numerical search",
    )
    restarts: PositiveInt = Field(default=64, description="Numerical search restarts")
    iters: PositiveInt = Field(default=300, description="Iterations per restart")
    planted_residual: PositiveFloat = Field(
        default=1e-6,
        description="Residual the search must reach on planted equivalences",
    )
    inequivalent_floor: PositiveFloat = Field(
        default=1e-3,
        description="Residual the search must stay above for unequal parameters",
    )


class ModuliClassificationCheckConfig(BaseModel):
    """Configuration for the moduli classification check."""

    model_config = ConfigDict(frozen=True)

    per_class: PositiveInt = Field(default=100, description="Matrices per class")
    phase_samples: PositiveInt = Field(default=256, description="Oracle phase samples")


class VerifyConfig(BaseModel):
    """Checks run by ``verify-paper``; each section builds one check."""

    model_config = ConfigDict(frozen=True)

    choi_calculus: ChoiCalculusCheckConfig = Field(default_factory=ChoiCalculusCheckConfig)
    coefficient_identity: CoefficientIdentityCheckConfig = Field(
        default_factory=CoefficientIdentityCheckConfig,
    )
    determinant_calculus: DeterminantCalculusCheckConfig = Field(
        default_factory=DeterminantCalculusCheckConfig,
    )
    singular_structure: SingularStructureCheckConfig = Field(
        default_factory=SingularStructureCheckConfig,
    )
    witness_sanity: WitnessSanityCheckConfig = Field(default_factory=WitnessSanityCheckConfig)
    ppt_baseline: PptBaselineCheckConfig = Field(default_factory=PptBaselineCheckConfig)
    local_inequivalence: LocalInequivalenceCheckConfig = Field(
        default_factory=LocalInequivalenceCheckConfig,
    )
    moduli_classification: ModuliClassificationCheckConfig = Field(
        default_factory=ModuliClassificationCheckConfig,
    )


class RunConfig(BaseModel):
    """Application configuration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: NonNegativeInt = Field(default=0, description="Root seed of all random streams")
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    output: Path | None = Field(
        default=None,
        description="Report destination; stdout when unset",
    )

    @classmethod
    def from_path_or_default(cls, path: Path | None = None) -> RunConfig:
        """Create configuration from a file, falling back to the default location.

        Parameters
        ----------
        path : Path | None
            Path to configuration file. If None, tries the default location.

        Returns
        -------
        RunConfig
            Loaded configuration, or the defaults when no file exists.

        Raises
        ------
        ConfigLoadError
            If a configuration file exists but cannot be loaded.

        """
        if path:
            return cls.from_path(path)

        if DEFAULT_CONFIG_PATH.is_file():
            return cls.from_path(DEFAULT_CONFIG_PATH)

        logger.debug("No config file found, using defaults")
        return cls()

    @classmethod
    def from_path(cls, path: Path) -> RunConfig:
        """Create configuration from a YAML file.

        Raises
        ------
        ConfigLoadError
            If file cannot be read or parsed.

        """
        try:
            with path.open() as f:
                data = yaml.safe_load(f) or {}
            config = cls.model_validate(data)
        except Exception as e:
            raise ConfigLoadError.from_path(path) from e
        else:
            logger.debug("Loaded configuration from %s", path)
            return config

    def with_overrides(self, overrides: dict[str, Any]) -> RunConfig:
        """Return a copy with dotted settings replaced, e.g. ``{"search.restarts": 8}``.

        ``None`` values are skipped so unset command-line options keep the loaded value.

        Raises
        ------
        ConfigLoadError
            If a key does not name an existing setting or a value fails validation.

        """
        data = self.model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            *sections, name = key.split(".")
            target = data
            for section in sections:
                if not isinstance(target.get(section), dict):
                    raise ConfigLoadError.invalid_override(key)
                target = target[section]
            if name not in target:
                raise ConfigLoadError.invalid_override(key)
            target[name] = value
        try:
            return type(self).model_validate(data)
        except ValidationError as e:
            raise ConfigLoadError.rejected_override(e) from e

    @model_validator(mode="after")
    def resolve_paths(self) -> RunConfig:
        """Expand ``~`` and make the output path absolute."""
        if self.output is not None:
            object.__setattr__(self, "output", self.output.expanduser().resolve())
        return self
