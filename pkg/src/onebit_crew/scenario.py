"""Scenario description shared by the design algorithms and the sweep runner.

Every tolerance and iteration cap is an explicit field with a default, so a
JSON scenario file fully pins an experiment. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .exceptions import ConfigError

JAMMING_KINDS = ("none", "spot", "barrage")


@dataclass(frozen=True)
class Jamming:
    """Jamming power-spectrum shape.

    ``kind`` is ``"none"``, ``"spot"`` (single tone at ``f0``) or
    ``"barrage"`` (flat over ``[f1, f2]``). Frequencies are normalized to
    ``[0, 1)``.
    """

    kind: str = "none"
    f0: float = 0.2
    f1: float = 0.2
    f2: float = 0.3

    def __post_init__(self):
        if self.kind not in JAMMING_KINDS:
            raise ConfigError(f"unknown jamming kind {self.kind!r}")
        if self.kind == "spot" and not 0.0 <= self.f0 < 1.0:
            raise ConfigError(f"spot frequency f0={self.f0} outside [0, 1)")
        if self.kind == "barrage" and not 0.0 <= self.f1 < self.f2 < 1.0:
            raise ConfigError(
                f"barrage band [{self.f1}, {self.f2}] must satisfy 0 <= f1 < f2 < 1")

    @classmethod
    def spot(cls, f0: float = 0.2) -> "Jamming":
        return cls(kind="spot", f0=f0)

    @classmethod
    def barrage(cls, f1: float = 0.2, f2: float = 0.3) -> "Jamming":
        return cls(kind="barrage", f1=f1, f2=f2)


@dataclass(frozen=True)
class ScenarioConfig:
    """One radar scenario plus the numerical knobs of every loop.

    Powers follow the usual convention: ``beta`` is the mean clutter power
    per range cell, ``sigma2`` the white-noise power and ``sigmaJ2`` the
    total jamming power (the jamming spectrum has unit mass).
    """

    N: int = 25
    beta: float = 1.0
    sigma2: float = 0.1
    sigmaJ2: float = 100.0
    jamming: Jamming = field(default_factory=Jamming)
    snapshots: int = 10_000
    oracle_mode: bool = True
    seed: int = 0
    # starting filter: "wstep" (filter update on the initial waveform) or "random"
    w_init: str = "wstep"
    # alternating outer loop
    outer_tol: float = 1e-5
    outer_cap: int = 50
    # Dinkelbach s-step
    dinkelbach_tol: float = 1e-6
    dinkelbach_cap: int = 100
    power_tol: float = 1e-8
    power_cap: int = 1000
    # (d, a, beta) fit
    fit_tol: float = 1e-8
    fit_cap: int = 500
    # CAN baseline
    can_tol: float = 1e-6
    can_cap: int = 10_000

    def __post_init__(self):
        if isinstance(self.jamming, dict):
            object.__setattr__(self, "jamming", _build(Jamming, self.jamming, "jamming"))
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}")
        if self.beta <= 0 or self.sigma2 <= 0:
            raise ConfigError("beta and sigma2 must be positive")
        if self.sigmaJ2 < 0:
            raise ConfigError("sigmaJ2 must be nonnegative")
        if self.snapshots < 1:
            raise ConfigError("snapshots must be >= 1")
        if self.w_init not in ("wstep", "random"):
            raise ConfigError(f"w_init must be 'wstep' or 'random', got {self.w_init!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        for name in ("outer_tol", "dinkelbach_tol", "power_tol", "fit_tol", "can_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("outer_cap", "dinkelbach_cap", "power_cap", "fit_cap", "can_cap"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        return _build(cls, data, "scenario")

    @classmethod
    def from_json(cls, path: str | Path) -> "ScenarioConfig":
        return cls.from_dict(load_json(path))


def jamming_scenario(N: int, jamming: str = "spot", **overrides) -> ScenarioConfig:
    """The jamming-plus-noise setting used for the MSE-versus-length comparison."""
    jam = Jamming.spot(0.2) if jamming == "spot" else Jamming.barrage(0.2, 0.3)
    base = dict(N=N, beta=1.0, sigma2=0.1, sigmaJ2=100.0, jamming=jam, oracle_mode=True)
    base.update(overrides)
    return ScenarioConfig(**base)


def load_json(path: str | Path) -> dict[str, Any]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def _build(cls, data: dict[str, Any], what: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{what} must be a JSON object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown {what} key(s): {', '.join(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"bad {what}: {exc}") from exc
