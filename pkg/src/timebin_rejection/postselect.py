"""Arrival-time post-selection, Pauli-frame corrections and sweeps.

Each decoder port emits a packet at time 0 (both arms short), time 1 (one
short and one long pass) and time 2 (both long). Only the time-1 packet is a
faithful copy of the input, up to a fixed Pauli frame and the noise
coefficient (delta on port A, eta on port B). With recovery enabled the
time-0 packet is merged into the time-2 slot, which then also carries a
correctable copy.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum
from typing import NamedTuple

import numpy as np

from .network import (
    CHANNELS,
    DEFAULT_LAYOUT,
    PORTS,
    NetworkLayout,
    build_network,
    transmit,
)
from .noise import NoiseParams
from .optics import apply
from .state import (
    NORM_SLACK,
    ModeLabel,
    PhotonState,
    Pol,
    QubitState,
    StateError,
    TwoPhotonState,
    embed_qubit,
    qubit_fidelity,
    qubit_vector,
)

MID = 1
LATE = 2


class DecodeError(StateError):
    """Raised when a state is not something a decoder could have emitted."""


class Pauli(str, Enum):
    I = "I"
    X = "X"
    Z = "Z"
    XZ = "XZ"

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI[self]

    def act(self, h: complex, v: complex) -> tuple[complex, complex]:
        """Apply to the (H, V) amplitudes of a qubit."""
        if self is Pauli.I:
            return h, v
        if self is Pauli.X:
            return v, h
        if self is Pauli.Z:
            return h, -v
        return -v, h


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# XZ means: apply Z, then X.
_PAULI = {Pauli.I: np.eye(2, dtype=complex), Pauli.X: _X, Pauli.Z: _Z,
          Pauli.XZ: _X @ _Z}


class _Outcome(NamedTuple):
    channel: int
    port: str
    time: int


class Outcome(_Outcome):
    """A detection event: decoder channel, output port and arrival time."""

    __slots__ = ()

    def __new__(cls, channel: int, port: str, time: int) -> Outcome:
        if channel not in CHANNELS or port not in PORTS:
            raise DecodeError(f"bad outcome ({channel!r}, {port!r})")
        if time not in (0, 1, 2):
            raise DecodeError(f"outcome time must be 0, 1 or 2, got {time!r}")
        return super().__new__(cls, channel, port, time)

    @property
    def key(self) -> str:
        return f"ch{self.channel}_{self.port.lower()}_t{self.time}"


@dataclass(frozen=True)
class Correction:
    """Pauli fix-up for an accepted branch.

    ``global_phase`` is the residual phase left after the Pauli: the corrected
    branch equals ``global_phase * c / 2 * (alpha|H> + beta|V>)`` with ``c``
    the noise coefficient of the port (delta for A, eta for B).
    """

    pauli: Pauli
    global_phase: complex = 1 + 0j

    def __post_init__(self) -> None:
        if abs(abs(self.global_phase) - 1.0) > NORM_SLACK:
            raise DecodeError("correction phase must have unit modulus")

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return np.array(self.pauli.act(vec[0], vec[1]))


_MID_TABLE = {
    Outcome(1, "A", MID): Correction(Pauli.X, 1j),
    Outcome(1, "B", MID): Correction(Pauli.I, 1j),
    Outcome(2, "A", MID): Correction(Pauli.XZ, 1),
    Outcome(2, "B", MID): Correction(Pauli.Z, -1),
}
_LATE_TABLE = {
    Outcome(1, "A", LATE): Correction(Pauli.Z, 1),
    Outcome(1, "B", LATE): Correction(Pauli.XZ, -1),
    Outcome(2, "A", LATE): Correction(Pauli.I, 1j),
    Outcome(2, "B", LATE): Correction(Pauli.X, 1j),
}


def outcome_table(recovery_enabled: bool) -> dict[Outcome, Correction]:
    """Accepted outcomes and their corrections; anything absent is rejected."""
    table = dict(_MID_TABLE)
    if recovery_enabled:
        table.update(_LATE_TABLE)
    return table


@dataclass(eq=False)
class Branch:
    """One outcome of a decoded photon.

    ``amplitudes`` are the raw (H, V) amplitudes at the outcome; ``corrected``
    is the normalized qubit after the correction, or ``None`` if rejected.
    """

    outcome: Outcome
    probability: float
    amplitudes: tuple[complex, complex]
    correction: Correction | None

    @property
    def accepted(self) -> bool:
        return self.correction is not None

    @cached_property
    def corrected(self) -> QubitState | None:
        if self.correction is None:
            return None
        h, v = self.correction.pauli.act(*self.amplitudes)
        norm = math.sqrt(self.probability)
        return QubitState(h / norm, v / norm)


_OUTCOMES = {(c, p, t): Outcome(c, p, t) for c in CHANNELS for p in PORTS for t in (0, 1, 2)}
_ORDER = sorted(_OUTCOMES.values())


def _split_by_outcome(s: PhotonState, layout: NetworkLayout
                      ) -> dict[Outcome, list[complex]]:
    """Group amplitudes by outcome as [H amplitude, V amplitude]."""
    ports = layout.output_ports
    groups: dict[Outcome, list[complex]] = {}
    for label, amp in s.items():
        where = ports.get(label.spatial)
        outcome = None if where is None else _OUTCOMES.get((*where, label.time))
        if outcome is None:
            raise DecodeError(f"not a decoder output: amplitude on {label!r}")
        vec = groups.get(outcome)
        if vec is None:
            vec = groups[outcome] = [0j, 0j]
        vec[label.pol is Pol.V] = amp
    return groups


def decode(s: PhotonState, recovery_enabled: bool,
           layout: NetworkLayout = DEFAULT_LAYOUT) -> list[Branch]:
    """Split a decoder output into outcome branches and correct accepted ones.

    With ``recovery_enabled`` the recovery delays are applied first; they only
    move time-0 packets, so a state that already went through them is left
    unchanged. Branches are returned sorted by outcome; rejected branches keep
    their probability so the total is 1.
    """
    if recovery_enabled and any(label.time == 0 for label in s):
        s = apply(layout.recovery, s)
    table = outcome_table(recovery_enabled)
    groups = _split_by_outcome(s, layout)
    branches = []
    for outcome in _ORDER:
        if outcome not in groups:
            continue
        h, v = groups[outcome]
        prob = h.real * h.real + h.imag * h.imag + v.real * v.real + v.imag * v.imag
        branches.append(Branch(outcome, prob, (h, v), table.get(outcome)))
    return branches


def accepted_probability(branches: Sequence[Branch], channel: int | None = None) -> float:
    return sum(b.probability for b in branches
               if b.accepted and (channel is None or b.outcome.channel == channel))


def min_fidelity(branches: Sequence[Branch], q: QubitState) -> float:
    """Worst fidelity over accepted branches (1.0 if none are accepted)."""
    fids = [qubit_fidelity(q, b.corrected) for b in branches if b.accepted]
    return min(fids, default=1.0)


def correct_branch(branch: PhotonState, correction: Correction) -> PhotonState:
    """Apply a Pauli correction to a localized branch, in place on its mode."""
    spatial, time, vec = qubit_vector(branch)
    out = correction.apply(vec)
    return PhotonState({ModeLabel(spatial, Pol.H, time): out[0],
                        ModeLabel(spatial, Pol.V, time): out[1]})


@dataclass(frozen=True)
class SweepRecord:
    theta: float
    phi: float
    p_success: float
    min_fidelity: float
    p_mid: dict[str, float] = field(default_factory=dict)
    p_rejected: float = 0.0

    def row(self) -> list[float]:
        return [self.theta, self.phi, self.p_success, self.min_fidelity,
                *(self.p_mid[k] for k in MID_KEYS), self.p_rejected]


MID_KEYS = tuple(f"p_ch{c}_{p.lower()}_mid" for c in CHANNELS for p in PORTS)


def sweep(theta_grid: Sequence[float], phi_grid: Sequence[float], q: QubitState,
          recovery: bool) -> list[SweepRecord]:
    """Evaluate success probability and fidelity over a noise-angle grid.

    Both channels share delta = cos(theta), eta = exp(i phi) sin(theta).
    Records are ordered theta-major.
    """
    if not len(theta_grid) or not len(phi_grid):
        raise ValueError("sweep grids must be nonempty")
    records = []
    for theta in theta_grid:
        for phi in phi_grid:
            p = NoiseParams.from_angles(theta, phi)
            branches = decode(transmit(q, p, p, recovery), recovery)
            mid = dict.fromkeys(MID_KEYS, 0.0)
            for b in branches:
                if b.outcome.time == MID:
                    mid[f"p_ch{b.outcome.channel}_{b.outcome.port.lower()}_mid"] = b.probability
            ok = accepted_probability(branches)
            total = sum(b.probability for b in branches)
            records.append(SweepRecord(
                theta=float(theta), phi=float(phi), p_success=ok,
                min_fidelity=min_fidelity(branches, q), p_mid=mid,
                p_rejected=max(total - ok, 0.0),
            ))
    return records


@dataclass(frozen=True)
class TwoPhotonResult:
    fidelity: float
    accepted_probability: float


def two_photon_check(alpha: complex, beta: complex, noise1: NoiseParams,
                     noise2: NoiseParams, recovery: bool,
                     layout: NetworkLayout = DEFAULT_LAYOUT) -> TwoPhotonResult:
    """Send the travelling half of alpha|HH> + beta|VV> through the set-up.

    The home photon stays put. Each accepted outcome of the traveller is
    corrected on the traveller alone and compared with the initial joint
    state; the worst fidelity over accepted outcomes is reported.
    """
    state = TwoPhotonState.correlated(alpha, beta, layout.a_in)
    net = build_network(noise1, noise2, recovery, layout)
    out = state.map(lambda part: apply(net, part))
    table = outcome_table(recovery)
    # joint amplitudes per outcome: rows home pol, columns traveller pol
    joint: dict[Outcome, np.ndarray] = {}
    for home_idx, home in enumerate(Pol):
        for outcome, amps in _split_by_outcome(out.part(home), layout).items():
            block = joint.setdefault(outcome, np.zeros((2, 2), dtype=complex))
            block[home_idx] = amps
    target = np.diag([complex(alpha), complex(beta)])
    worst, p_ok = 1.0, 0.0
    for outcome, block in joint.items():
        corr = table.get(outcome)
        if corr is None:
            continue
        fixed = block @ corr.pauli.matrix.T
        norm2 = float(np.vdot(fixed, fixed).real)
        p_ok += norm2
        worst = min(worst, float(abs(np.vdot(target, fixed)) ** 2) / norm2)
    return TwoPhotonResult(min(worst, 1.0), p_ok)


def branch_state(q: QubitState, outcome: Outcome, noise1: NoiseParams,
                 noise2: NoiseParams, recovery: bool = False) -> PhotonState:
    """Uncorrected amplitude of one outcome branch, as a localized state."""
    layout = DEFAULT_LAYOUT
    s = transmit(q, noise1, noise2, recovery, layout)
    path = layout.port_path(outcome.channel, outcome.port)
    return PhotonState({k: v for k, v in s.items()
                        if k.spatial == path and k.time == outcome.time})


def expected_branch(q: QubitState, outcome: Outcome, noise1: NoiseParams,
                    noise2: NoiseParams) -> PhotonState:
    """Corrected branch as the table predicts: phase * c/2 * q on its mode."""
    corr = outcome_table(True)[outcome]
    noise = noise1 if outcome.channel == 1 else noise2
    c = noise.delta if outcome.port == "A" else noise.eta
    path = DEFAULT_LAYOUT.port_path(outcome.channel, outcome.port)
    return corr.global_phase * (c / 2) * embed_qubit(q, path, outcome.time)

