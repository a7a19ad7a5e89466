"""Monte-Carlo BB84 over the collective-noise link.

Alice prepares one of the four states of the X and Y bases; the photon either
goes through the error-rejecting encoder/decoder pair (``protected``) or
straight through one noisy path. Bob measures in a random basis and the two
sift on matching bases. Sifting uses full knowledge of both sides; there is
no eavesdropper.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .network import DEFAULT_LAYOUT, transmit
from .noise import NoiseModel, NoiseParams, UniformAngles, collective_noise, sample_noise
from .optics import ConfigurationError, apply
from .postselect import decode
from .state import QubitState, embed_qubit, qubit_vector

_R = 1 / math.sqrt(2)


class Basis(str, Enum):
    X = "X"
    Y = "Y"


@lru_cache(maxsize=None)
def prepare(bit: int, basis: Basis | str) -> QubitState:
    """|+x>, |-x>, |+y>, |-y> for (0, X), (1, X), (0, Y), (1, Y)."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    sign = 1 if bit == 0 else -1
    if Basis(basis) is Basis.X:
        return QubitState(_R, sign * _R)
    return QubitState(_R, sign * 1j * _R)


def born_one(q: QubitState, basis: Basis | str) -> float:
    """Probability that measuring ``q`` in ``basis`` yields bit 1."""
    minus = prepare(1, basis)
    ov = minus.alpha.conjugate() * q.alpha + minus.beta.conjugate() * q.beta
    return min(abs(ov) ** 2, 1.0)


def measure(q: QubitState, basis: Basis | str, rng: np.random.Generator) -> int:
    """Sample a bit with Born probabilities; consumes one uniform draw."""
    return int(rng.random() < born_one(q, basis))


@dataclass(frozen=True)
class Bb84Config:
    n_photons: int
    noise_model: NoiseModel = field(default_factory=UniformAngles)
    seed: int = 0
    recovery: bool = False
    protected: bool = True

    def __post_init__(self) -> None:
        if int(self.n_photons) != self.n_photons or self.n_photons < 1:
            raise ConfigurationError(f"n_photons must be >= 1, got {self.n_photons!r}")


@dataclass(slots=True)
class PhotonEvent:
    index: int
    alice_bit: int
    alice_basis: str
    bob_basis: str
    delta: complex
    eta: complex
    outcome: str | None
    accepted: bool
    bob_bit: int | None
    sifted: bool
    error: bool

    def to_json(self) -> dict:
        d = asdict(self)
        d["delta"] = [self.delta.real, self.delta.imag]
        d["eta"] = [self.eta.real, self.eta.imag]
        return d


@dataclass(frozen=True)
class SessionStats:
    n_photons: int
    n_accepted: int
    n_sifted: int
    n_errors: int
    accepted_fraction: float
    sifted_fraction: float  # sifted / accepted
    qber: float  # errors / sifted; nan when nothing was sifted
    qber_by_basis: dict[str, float]
    outcome_counts: dict[str, int]

    def to_json(self) -> dict:
        return asdict(self)


def _streams(seed: int) -> list[np.random.Generator]:
    # alice choices, bob basis, noise, arrival outcome, measurement
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(5)]


def simulate(config: Bb84Config) -> Iterator[PhotonEvent]:
    """Per-photon events of one session, deterministic in ``config.seed``.

    Protected and unprotected sessions with the same seed share Alice's
    choices, Bob's bases and the noise draws.
    """
    alice, bob, noise_rng, arrival, meas = _streams(config.seed)
    n = config.n_photons
    bits = alice.integers(0, 2, n)
    a_bases = alice.integers(0, 2, n)
    b_bases = bob.integers(0, 2, n)
    arrivals = arrival.random(n)
    noise = sample_noise(np.random.SeedSequence(int(noise_rng.integers(2**63))),
                         config.noise_model)
    bases = (Basis.X, Basis.Y)
    bare_path = DEFAULT_LAYOUT.channel_path(1)

    for i in range(n):
        bit, a_basis, b_basis = int(bits[i]), bases[a_bases[i]], bases[b_bases[i]]
        q = prepare(bit, a_basis)
        n1, n2 = next(noise), next(noise)
        outcome = None
        if config.protected:
            branches = decode(transmit(q, n1, n2, config.recovery), config.recovery)
            u, acc = arrivals[i], 0.0
            chosen = branches[-1]
            for b in branches:
                acc += b.probability
                if u < acc:
                    chosen = b
                    break
            outcome = chosen.outcome.key
            received = chosen.corrected
        else:
            out = apply(collective_noise(bare_path, n1), embed_qubit(q, bare_path))
            received = QubitState.from_vector(qubit_vector(out)[2])
        if received is None:
            yield PhotonEvent(i, bit, a_basis.value, b_basis.value, n1.delta, n1.eta,
                              outcome, False, None, False, False)
            continue
        bob_bit = measure(received, b_basis, meas)
        sifted = a_basis is b_basis
        yield PhotonEvent(i, bit, a_basis.value, b_basis.value, n1.delta, n1.eta,
                          outcome, True, bob_bit, sifted, sifted and bob_bit != bit)


def summarize(events: Iterable[PhotonEvent]) -> SessionStats:
    n = n_acc = n_sift = n_err = 0
    per_basis: dict[str, list[int]] = {b.value: [0, 0] for b in Basis}
    outcomes: Counter[str] = Counter()
    for ev in events:
        n += 1
        if ev.outcome is not None:
            outcomes[ev.outcome] += 1
        if not ev.accepted:
            continue
        n_acc += 1
        if ev.sifted:
            n_sift += 1
            n_err += ev.error
            per_basis[ev.alice_basis][0] += 1
            per_basis[ev.alice_basis][1] += ev.error
    ratio = lambda a, b: a / b if b else math.nan  # noqa: E731
    return SessionStats(
        n_photons=n,
        n_accepted=n_acc,
        n_sifted=n_sift,
        n_errors=n_err,
        accepted_fraction=ratio(n_acc, n),
        sifted_fraction=ratio(n_sift, n_acc),
        qber=ratio(n_err, n_sift),
        qber_by_basis={k: ratio(e, s) for k, (s, e) in per_basis.items()},
        outcome_counts=dict(sorted(outcomes.items())),
    )


def run(config: Bb84Config) -> SessionStats:
    return summarize(simulate(config))


def unprotected_qber(p: NoiseParams, basis: Basis | str) -> float:
    """Exact bare-channel error rate in ``basis``, averaged over Alice's bit."""
    U = p.matrix
    err = 0.0
    for bit in (0, 1):
        sent = U @ prepare(bit, basis).vector
        wrong = prepare(1 - bit, basis).vector
        err += abs(np.vdot(wrong, sent)) ** 2
    return float(err / 2)
