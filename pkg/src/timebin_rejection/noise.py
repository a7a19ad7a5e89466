"""Collective polarization noise and seeded samplers of its parameters.

The channel rotates |H> -> delta|H> + eta|V> identically on every time bin of
a path. The |V> row is completed as the SU(2) partner -conj(eta)|H> +
conj(delta)|V>.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .optics import ConfigurationError, Element, Image
from .state import NORM_SLACK, ModeLabel, Pol


@dataclass(frozen=True)
class NoiseParams:
    delta: complex
    eta: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", complex(self.delta))
        object.__setattr__(self, "eta", complex(self.eta))
        norm2 = abs(self.delta) ** 2 + abs(self.eta) ** 2
        if abs(norm2 - 1.0) > NORM_SLACK:
            raise ConfigurationError(f"|delta|^2 + |eta|^2 = {norm2!r}, expected 1")

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> NoiseParams:
        """delta = cos(theta), eta = exp(i phi) sin(theta)."""
        return cls(math.cos(theta), cmath.exp(1j * phi) * math.sin(theta))

    def adjoint(self) -> NoiseParams:
        return NoiseParams(self.delta.conjugate(), -self.eta)

    @property
    def matrix(self) -> np.ndarray:
        """2x2 unitary acting on (H, V) column vectors."""
        d, e = self.delta, self.eta
        return np.array([[d, -e.conjugate()], [e, d.conjugate()]])


IDENTITY_NOISE = NoiseParams(1.0, 0.0)


def collective_noise(spatial: str, p: NoiseParams) -> Element:
    """The same polarization rotation on every time bin of ``spatial``."""
    d, e = p.delta, p.eta
    ec, dc = -e.conjugate(), d.conjugate()

    def rule(label: ModeLabel) -> Image:
        h, v = label.with_pol(Pol.H), label.with_pol(Pol.V)
        if label.pol is Pol.H:
            return ((h, d), (v, e))
        return ((h, ec), (v, dc))

    return Element("noise", dict(spatial=spatial, delta=d, eta=e),
                   (spatial,), (spatial,), rule)


@dataclass(frozen=True)
class FixedNoise:
    params: NoiseParams = IDENTITY_NOISE


@dataclass(frozen=True)
class UniformAngles:
    """theta uniform on [0, pi/2], phi uniform on [0, 2 pi)."""


@dataclass(frozen=True)
class SlowDrift:
    """Gaussian random walk in (theta, phi), reflected into [0, pi/2] for theta.

    ``rate`` is the per-step standard deviation in radians.
    """

    rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ConfigurationError(f"drift rate must be positive, got {self.rate!r}")


NoiseModel = FixedNoise | UniformAngles | SlowDrift


def _reflect(theta: float) -> float:
    period = math.pi
    theta = theta % period
    return period - theta if theta > period / 2 else theta


def sample_noise(seed: int | np.random.SeedSequence,
                 model: NoiseModel) -> Iterator[NoiseParams]:
    """Endless deterministic stream of noise parameters for ``model``."""
    if isinstance(model, FixedNoise):
        while True:
            yield model.params
    rng = np.random.default_rng(seed)
    if isinstance(model, UniformAngles):
        while True:
            # batch draws; the stream is still a pure function of the seed
            thetas = rng.uniform(0.0, math.pi / 2, 4096)
            phis = rng.uniform(0.0, 2 * math.pi, 4096)
            for theta, phi in zip(thetas, phis):
                yield NoiseParams.from_angles(theta, phi)
    elif isinstance(model, SlowDrift):
        theta = rng.uniform(0.0, math.pi / 2)
        phi = rng.uniform(0.0, 2 * math.pi)
        while True:
            yield NoiseParams.from_angles(theta, phi)
            step = rng.normal(0.0, model.rate, 2)
            theta = _reflect(theta + step[0])
            phi = (phi + step[1]) % (2 * math.pi)
    else:
        raise ConfigurationError(f"unknown noise model {model!r}")
