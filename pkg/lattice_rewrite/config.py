from __future__ import annotations

import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_serializer,
    field_validator,
    model_validator,
)

from .codebook import CodeParams
from .codec import Strategy, check_key
from .errors import ConfigError, LatticeRewriteError
from .generators import builtin_generators
from .lattice import GeneratorMatrix, LatticeSpec, format_rational, parse_rational, validate_lattice
from .registry import get_generator

CONFIG_ENV_VAR = "LATTICE_REWRITE_CONFIG"


def _rational_or_none(value: Any) -> Optional[Fraction]:
    if value is None or isinstance(value, Fraction):
        return value
    try:
        return parse_rational(value)
    except LatticeRewriteError as exc:
        raise ValueError(str(exc)) from exc


class LatticeDefinition(BaseModel):
    """Lattice definition file: {"n": int, "M": int, "generator": [["p/q", ...], ...]}."""

    n: int = Field(ge=1, description="Lattice dimension")
    M: int = Field(ge=1, description="Block side length")
    generator: List[List[Union[int, str]]] = Field(
        description="Lower-triangular generator rows; entries as integers or 'p/q' strings"
    )

    @model_validator(mode="after")
    def _check_shape(self) -> "LatticeDefinition":
        if len(self.generator) != self.n or any(len(row) != self.n for row in self.generator):
            raise ValueError(f"generator must be a {self.n}x{self.n} matrix")
        return self

    def to_generator(self) -> GeneratorMatrix:
        return GeneratorMatrix(tuple(tuple(row) for row in self.generator))


class RunConfig(BaseModel):
    """Everything one CLI invocation needs; all randomness flows from key and seed."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    lattice: str = Field(
        default="e8",
        description="Built-in lattice name (e8, rect, skew2) or path to a lattice definition file",
    )
    n: Optional[int] = Field(default=None, ge=1, description="Dimension for the rect lattice")
    M: Optional[int] = Field(default=None, ge=1, description="Block side; M / g_ii must be integers")
    q: Optional[Fraction] = Field(default=None, description="Level count, q - 1 = D * M")
    D: Optional[Fraction] = Field(default=None, description="Blocks per axis, may be non-integer")
    key: int = Field(default=0, description="64-bit unsigned hash key")
    seed: int = Field(default=0, ge=0, description="Base seed; trial t uses seed + t")
    trials: int = Field(default=100, ge=1, description="Lifetime trials per parameter point")
    strategy: Strategy = Field(default=Strategy.neighbors, description="Rewrite candidate search")
    hash_off: bool = Field(default=False, description="Force the zero hash vector in every block")
    out: Optional[Path] = Field(default=None, description="Output path for CSV results")
    jobs: int = Field(default=1, ge=1, description="Worker processes for sweeps")
    q_values: List[int] = Field(default_factory=list, description="Sweep level counts q")
    M_values: List[int] = Field(default_factory=list, description="Sweep block sides M")
    D_values: List[Fraction] = Field(default_factory=list, description="Linearity check values of D")

    @field_validator("q", "D", mode="before")
    @classmethod
    def _parse_rational(cls, value: Any) -> Optional[Fraction]:
        return _rational_or_none(value)

    @field_validator("key")
    @classmethod
    def _check_key(cls, value: int) -> int:
        try:
            return check_key(value)
        except LatticeRewriteError as exc:
            raise ValueError(str(exc)) from exc

    @field_validator("D_values", mode="before")
    @classmethod
    def _parse_rationals(cls, value: Any) -> Any:
        if isinstance(value, (list, tuple)):
            return [_rational_or_none(v) for v in value]
        return value

    @model_validator(mode="after")
    def _one_of_q_or_d(self) -> "RunConfig":
        if self.q is not None and self.D is not None:
            raise ValueError("supply exactly one of q or D")
        return self

    @field_serializer("q", "D")
    def _serialize_rational(self, value: Optional[Fraction]) -> Optional[str]:
        return None if value is None else format_rational(value)

    @field_serializer("D_values")
    def _serialize_rationals(self, value: List[Fraction]) -> List[str]:
        return [format_rational(v) for v in value]

    @field_serializer("out")
    def _serialize_path(self, value: Optional[Path]) -> Optional[str]:
        return None if value is None else str(value)

    def code_params(self, n: int, M: int) -> CodeParams:
        if self.q is not None:
            return CodeParams.from_levels(n, M, self.q)
        if self.D is not None:
            return CodeParams.from_blocks(n, M, self.D)
        raise ConfigError("Supply exactly one of q or D")


def validate_config(data: Dict[str, Any]) -> Tuple[bool, Optional[str]]:
    """Validate a configuration mapping.

    Returns:
        Tuple of (is_valid, error_message)
    """
    try:
        RunConfig.model_validate(data)
        return True, None
    except ValidationError as e:
        return False, str(e)


def load_config(path: Optional[Path] = None) -> RunConfig:
    """Load a RunConfig from path, else from $LATTICE_REWRITE_CONFIG, else defaults."""
    if path is None:
        env_path = os.getenv(CONFIG_ENV_VAR)
        path = Path(env_path) if env_path else None
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"Config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config file {path} is not valid JSON: {exc}") from exc
    return RunConfig.model_validate(data)


def merge_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Apply CLI flags on top of a file config; None means "not given"."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    data = config.model_dump()
    if "q" in updates:
        data["D"] = None
    if "D" in updates:
        data["q"] = None
    data.update(updates)
    return RunConfig.model_validate(data)


def save_config(config: RunConfig, path: Path) -> None:
    Path(path).write_text(config.model_dump_json(indent=2) + "\n")


def load_generator(config: RunConfig) -> Tuple[GeneratorMatrix, Optional[int]]:
    """Resolve the lattice selector; a definition file also supplies a default M."""
    if config.lattice in builtin_generators():
        return get_generator(config.lattice)(config.n), None
    path = Path(config.lattice)
    if not path.is_file():
        known = ", ".join(sorted(builtin_generators()))
        raise ConfigError(f"Unknown lattice {config.lattice!r}: not a built-in ({known}) or a file")
    try:
        definition = LatticeDefinition.model_validate_json(path.read_text())
    except ValidationError as exc:
        raise ConfigError(f"Invalid lattice definition {path}: {exc}") from exc
    return definition.to_generator(), definition.M


def resolve_lattice(config: RunConfig) -> LatticeSpec:
    generator, file_M = load_generator(config)
    M = config.M if config.M is not None else file_M
    if M is None:
        raise ConfigError("M is required (--M or the lattice definition file)")
    return validate_lattice(generator, M)


def resolve_code(config: RunConfig) -> Tuple[LatticeSpec, CodeParams]:
    lattice = resolve_lattice(config)
    return lattice, config.code_params(lattice.n, lattice.M)
