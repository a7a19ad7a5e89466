"""Sparse single-photon states over labelled optical modes.

A mode is a (spatial path, polarization, time bin) triple. Time bins count
path-difference units of the unbalanced interferometers: a short arm adds 0,
a long arm adds 1.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

PRUNE = 1e-15
NORM_SLACK = 1e-12


class StateError(ValueError):
    """Raised when a state violates a structural precondition."""


class Pol(str, Enum):
    H = "H"
    V = "V"

    def flipped(self) -> Pol:
        return Pol.V if self is Pol.H else Pol.H


class _Label(NamedTuple):
    spatial: str
    pol: Pol
    time: int


class ModeLabel(_Label):
    """One optical basis mode. Validates ``pol`` and ``time`` on construction."""

    __slots__ = ()

    def __new__(cls, spatial: str, pol: Pol | str, time: int = 0) -> ModeLabel:
        pol = Pol(pol)
        if int(time) != time or time < 0:
            raise StateError(f"time bin must be a non-negative integer, got {time!r}")
        return super().__new__(cls, str(spatial), pol, int(time))

    def shifted(self, k: int) -> ModeLabel:
        return _Label.__new__(ModeLabel, self.spatial, self.pol, self.time + k)

    def moved(self, spatial: str) -> ModeLabel:
        return _Label.__new__(ModeLabel, spatial, self.pol, self.time)

    def with_pol(self, pol: Pol) -> ModeLabel:
        return _Label.__new__(ModeLabel, self.spatial, pol, self.time)

    def __repr__(self) -> str:
        return f"({self.spatial},{self.pol.value},{self.time})"


@dataclass(frozen=True)
class QubitState:
    """Polarization qubit alpha|H> + beta|V>."""

    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        norm2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm2 - 1.0) > NORM_SLACK:
            raise StateError(f"qubit not normalized: |alpha|^2+|beta|^2 = {norm2!r}")

    @classmethod
    def from_vector(cls, vec: Iterable[complex]) -> QubitState:
        """Normalize a nonzero 2-vector into a qubit."""
        a, b = (complex(x) for x in vec)
        norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if norm == 0.0:
            raise StateError("cannot normalize the zero vector")
        return cls(a / norm, b / norm)

    @classmethod
    def random(cls, rng: np.random.Generator) -> QubitState:
        return cls.from_vector(rng.normal(size=2) + 1j * rng.normal(size=2))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)


def qubit_fidelity(a: QubitState, b: QubitState) -> float:
    """|<a|b>|^2 for two normalized qubits."""
    ov = a.alpha.conjugate() * b.alpha + a.beta.conjugate() * b.beta
    return min(abs(ov) ** 2, 1.0)


class PhotonState(Mapping):
    """Immutable sparse amplitude map ``ModeLabel -> complex``.

    Amplitudes below ``PRUNE`` in magnitude are dropped. Sub-normalized states
    are allowed (a post-selected branch), super-normalized ones are not.
    """

    __slots__ = ("_amps",)

    def __init__(self, amplitudes: Mapping[ModeLabel, complex] | None = None):
        amps = {}
        for label, amp in (amplitudes or {}).items():
            amp = complex(amp)
            if abs(amp) >= PRUNE:
                if not isinstance(label, ModeLabel):
                    label = ModeLabel(*label)
                amps[label] = amp
        norm2 = sum(abs(a) ** 2 for a in amps.values())
        if norm2 > 1.0 + NORM_SLACK:
            raise StateError(f"squared norm {norm2!r} exceeds 1")
        self._amps = amps

    @classmethod
    def _trusted(cls, amps: dict[ModeLabel, complex]) -> PhotonState:
        """Wrap an already pruned dict of validated labels."""
        norm2 = 0.0
        for a in amps.values():
            norm2 += a.real * a.real + a.imag * a.imag
        if norm2 > 1.0 + NORM_SLACK:
            raise StateError(f"squared norm {norm2!r} exceeds 1")
        self = cls.__new__(cls)
        self._amps = amps
        return self

    def items(self):
        return self._amps.items()

    def raw(self) -> dict[ModeLabel, complex]:
        """A copy of the underlying amplitude dict."""
        return dict(self._amps)

    def __getitem__(self, label: ModeLabel) -> complex:
        return self._amps[label]

    def __iter__(self) -> Iterator[ModeLabel]:
        return iter(self._amps)

    def __len__(self) -> int:
        return len(self._amps)

    def amplitude(self, label: ModeLabel) -> complex:
        return self._amps.get(label, 0j)

    def norm2(self) -> float:
        return sum(abs(a) ** 2 for a in self._amps.values())

    def __add__(self, other: PhotonState) -> PhotonState:
        out = dict(self._amps)
        for label, amp in other.items():
            out[label] = out.get(label, 0j) + amp
        return PhotonState(out)

    def __mul__(self, scalar: complex) -> PhotonState:
        return PhotonState({k: scalar * v for k, v in self._amps.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhotonState):
            return NotImplemented
        return self._amps == other._amps

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {v:.6g}" for k, v in sorted(self._amps.items()))
        return f"PhotonState({{{body}}})"

    def supports(self) -> set[tuple[str, int]]:
        """Distinct (spatial, time) pairs carrying amplitude."""
        return {(label.spatial, label.time) for label in self._amps}


def basis_state(label: ModeLabel) -> PhotonState:
    return PhotonState({label: 1.0})


def embed_qubit(q: QubitState, spatial: str, time: int = 0) -> PhotonState:
    """Place a polarization qubit on one path and time bin."""
    return PhotonState({
        ModeLabel(spatial, Pol.H, time): q.alpha,
        ModeLabel(spatial, Pol.V, time): q.beta,
    })


def inner_product(s1: PhotonState, s2: PhotonState) -> complex:
    """Hermitian inner product <s1|s2>, antilinear in ``s1``."""
    if len(s2) < len(s1):
        return sum((s1.amplitude(k).conjugate() * v for k, v in s2.items()), 0j)
    return sum((v.conjugate() * s2.amplitude(k) for k, v in s1.items()), 0j)


def filter_state(
    s: PhotonState, keep: Callable[[ModeLabel], bool]
) -> tuple[PhotonState, float]:
    """Restrict ``s`` to labels matching ``keep`` without renormalizing.

    Returns the restricted branch and its squared norm, which is the detection
    probability of that branch.
    """
    branch = PhotonState({k: v for k, v in s.items() if keep(k)})
    return branch, branch.norm2()


def qubit_vector(s: PhotonState) -> tuple[str, int, np.ndarray]:
    """Read a branch localized on one (path, time) as an unnormalized (H, V) vector."""
    support = s.supports()
    if not support:
        raise StateError("empty post-selection branch")
    if len(support) > 1:
        raise StateError(f"not a localized qubit: support spans {sorted(support)}")
    ((spatial, time),) = support
    vec = np.array([
        s.amplitude(ModeLabel(spatial, Pol.H, time)),
        s.amplitude(ModeLabel(spatial, Pol.V, time)),
    ])
    return spatial, time, vec


def fidelity_to_qubit(s: PhotonState, q: QubitState) -> float:
    """Overlap |<q|s>|^2 / <s|s> of a localized branch with a reference qubit."""
    _, _, vec = qubit_vector(s)
    norm2 = float(np.vdot(vec, vec).real)
    return min(abs(np.vdot(q.vector, vec)) ** 2 / norm2, 1.0)


def unit_phase(phase: complex, tol: float = NORM_SLACK) -> complex:
    phase = complex(phase)
    if abs(abs(phase) - 1.0) > tol:
        raise StateError(f"phase {phase!r} is not of unit modulus")
    return phase


def phase_of(z: complex) -> complex:
    return cmath.exp(1j * cmath.phase(z))


class TwoPhotonState(Mapping):
    """Home photon polarization paired with a travelling-photon mode.

    Only the travelling photon passes through optics; the home photon is a
    spectator indexed by its polarization.
    """

    __slots__ = ("_parts",)

    def __init__(self, parts: Mapping[Pol, PhotonState]):
        parts = {Pol(k): v for k, v in parts.items() if len(v)}
        norm2 = sum(v.norm2() for v in parts.values())
        if norm2 > 1.0 + NORM_SLACK:
            raise StateError(f"squared norm {norm2!r} exceeds 1")
        self._parts = parts

    @classmethod
    def correlated(cls, alpha: complex, beta: complex, spatial: str,
                   time: int = 0) -> TwoPhotonState:
        """alpha|H>_h|H>_t + beta|V>_h|V>_t with the traveller on ``spatial``."""
        if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > NORM_SLACK:
            raise StateError("alpha, beta not normalized")
        return cls({
            Pol.H: PhotonState({ModeLabel(spatial, Pol.H, time): alpha}),
            Pol.V: PhotonState({ModeLabel(spatial, Pol.V, time): beta}),
        })

    def __getitem__(self, home: Pol) -> PhotonState:
        return self._parts[home]

    def __iter__(self) -> Iterator[Pol]:
        return iter(self._parts)

    def __len__(self) -> int:
        return len(self._parts)

    def part(self, home: Pol) -> PhotonState:
        return self._parts.get(home, PhotonState())

    def norm2(self) -> float:
        return sum(v.norm2() for v in self._parts.values())

    def map(self, fn: Callable[[PhotonState], PhotonState]) -> TwoPhotonState:
        return TwoPhotonState({k: fn(v) for k, v in self._parts.items()})
