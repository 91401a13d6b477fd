"""Forward diffusion steps and noise schedules.

The step rule is x_t = sqrt(alpha_t) * x_{t-1} + sqrt(1 - alpha_t) * eps with
alpha_t in (0, 1]; chaining it gives the closed-form marginal
x_t = sqrt(abar_t) * x_0 + sqrt(1 - abar_t) * eps where abar_t is the running
product of the alphas. Noise is always an explicit argument, never sampled
internally, so every operation is deterministic; samplers live in the caller.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, ValidationError

# Conventional linear-schedule endpoints; used when nothing else is configured.
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02
DEFAULT_STEPS = 1000


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step diffusion coefficients alpha_t with their running product."""

    alphas: np.ndarray = field(repr=False)
    cumulative: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise ValidationError("schedule needs at least one alpha")
        if np.any(a <= 0) or np.any(a > 1):
            raise ValidationError("every alpha must lie in (0, 1]")
        c = np.asarray(self.cumulative, dtype=np.float64)
        if c.shape != a.shape:
            raise ValidationError("cumulative product shape must match alphas")
        if not np.allclose(c, np.cumprod(a), rtol=1e-12, atol=0):
            raise ValidationError("cumulative is not the running product of alphas")
        a.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "cumulative", c)

    @classmethod
    def from_alphas(cls, alphas) -> "NoiseSchedule":
        a = np.asarray(alphas, dtype=np.float64)
        return cls(alphas=a, cumulative=np.cumprod(a))

    def __len__(self) -> int:
        return int(self.alphas.size)

    def alpha(self, t: int) -> float:
        """alpha_t for 1-based step index t."""
        self._check_t(t)
        return float(self.alphas[t - 1])

    def alpha_bar(self, t: int) -> float:
        """Running product of alphas up to 1-based step index t."""
        self._check_t(t)
        return float(self.cumulative[t - 1])

    def _check_t(self, t: int) -> None:
        if not (1 <= t <= len(self)):
            raise ValidationError(f"step index {t} outside 1..{len(self)}")


@dataclass(frozen=True)
class LatentState:
    """A latent vector together with its diffusion step index."""

    values: np.ndarray = field(repr=False)
    timestep: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValidationError("latent values must be a 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValidationError("latent values must be finite")
        if self.timestep < 0:
            raise ValidationError("timestep must be >= 0")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def forward_step(x_prev: LatentState, alpha_t: float, noise: np.ndarray) -> LatentState:
    """One forward diffusion step from x_{t-1} to x_t."""
    if not (0 < alpha_t <= 1):
        raise ValidationError(f"alpha_t must be in (0, 1], got {alpha_t}")
    eps = np.asarray(noise, dtype=np.float64)
    if eps.shape != x_prev.values.shape:
        raise DimensionMismatchError(
            f"noise shape {eps.shape} does not match state shape {x_prev.values.shape}"
        )
    values = np.sqrt(alpha_t) * x_prev.values + np.sqrt(1.0 - alpha_t) * eps
    return LatentState(values=values, timestep=x_prev.timestep + 1)


def forward_marginal(x0: LatentState, schedule: NoiseSchedule, t: int,
                     noise: np.ndarray) -> LatentState:
    """Jump straight from x_0 to x_t using the closed-form marginal."""
    abar = schedule.alpha_bar(t)
    eps = np.asarray(noise, dtype=np.float64)
    if eps.shape != x0.values.shape:
        raise DimensionMismatchError(
            f"noise shape {eps.shape} does not match state shape {x0.values.shape}"
        )
    values = np.sqrt(abar) * x0.values + np.sqrt(1.0 - abar) * eps
    return LatentState(values=values, timestep=t)


def make_linear_schedule(beta_start: float = DEFAULT_BETA_START,
                         beta_end: float = DEFAULT_BETA_END,
                         steps: int = DEFAULT_STEPS) -> NoiseSchedule:
    """Linearly spaced betas, endpoints inclusive; alpha_t = 1 - beta_t."""
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    if not (0 < beta_start <= beta_end < 1):
        raise ValidationError(
            f"need 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
        )
    if steps == 1:
        betas = np.array([beta_start], dtype=np.float64)
    else:
        betas = np.linspace(beta_start, beta_end, steps, dtype=np.float64)
    return NoiseSchedule.from_alphas(1.0 - betas)


def save_schedule(schedule: NoiseSchedule, path) -> None:
    """Write one alpha per line, full precision, for cross-implementation diffing."""
    with open(path, "w", encoding="utf-8") as fh:
        for a in schedule.alphas:
            fh.write(f"{float(a)!r}\n")


def load_schedule(path) -> NoiseSchedule:
    alphas = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                alphas.append(float(line))
    if not alphas:
        raise ValidationError(f"no alphas found in {path}")
    return NoiseSchedule.from_alphas(alphas)
