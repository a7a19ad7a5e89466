"""Named numerical checks run by ``timebin-rejection verify``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .network import DEFAULT_LAYOUT, NetworkLayout, build_network, transmit
from .noise import NoiseParams
from .optics import Element, Image, compose
from .oracle import ModeBasis, compare, dense_matrix, gram_deviation
from .postselect import accepted_probability, decode, min_fidelity, two_photon_check
from .state import ModeLabel, Pol, QubitState


@dataclass(frozen=True)
class Check:
    name: str
    tolerance: float
    deviation: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  [{self.note}]" if self.note else ""
        return (f"{status}  {self.name}: max dev {self.deviation:.3e} "
                f"(tol {self.tolerance:.0e}){extra}")


def random_noise(rng: np.random.Generator) -> NoiseParams:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return NoiseParams(v[0], v[1])


def decoder_golden_amplitudes(q: QubitState, p: NoiseParams) -> dict[ModeLabel, complex]:
    """Hand-derived channel-1 port amplitudes, keyed by output label."""
    a, b, d, e = q.alpha, q.beta, p.delta, p.eta
    A, B = DEFAULT_LAYOUT.port_path(1, "A"), DEFAULT_LAYOUT.port_path(1, "B")
    H, V = Pol.H, Pol.V
    return {
        ModeLabel(A, H, 0): a * d / 2, ModeLabel(A, H, 1): 1j * b * d / 2,
        ModeLabel(A, V, 1): 1j * a * d / 2, ModeLabel(A, V, 2): -b * d / 2,
        ModeLabel(B, V, 0): a * e / 2, ModeLabel(B, V, 1): 1j * b * e / 2,
        ModeLabel(B, H, 1): 1j * a * e / 2, ModeLabel(B, H, 2): -b * e / 2,
    }


def check_decoder_golden(rng, layout=DEFAULT_LAYOUT, n=100) -> Check:
    worst = 0.0
    ch1 = {layout.port_path(1, "A"), layout.port_path(1, "B")}
    for _ in range(n):
        q, p1, p2 = QubitState.random(rng), random_noise(rng), random_noise(rng)
        out = transmit(q, p1, p2, layout=layout)
        golden = decoder_golden_amplitudes(q, p1)
        labels = set(golden) | {l for l in out if l.spatial in ch1}
        worst = max(worst, max(abs(out.amplitude(l) - golden.get(l, 0j)) for l in labels))
    return Check("decoder-golden", 1e-12, worst)


def check_unitarity(rng, layout=DEFAULT_LAYOUT, n=1000) -> Check:
    worst = 0.0
    for _ in range(n):
        q, p1, p2 = QubitState.random(rng), random_noise(rng), random_noise(rng)
        worst = max(worst, abs(transmit(q, p1, p2, layout=layout).norm2() - 1.0))
    return Check("unitarity", 1e-12, worst)


def check_success(rng, recovery: bool, layout=DEFAULT_LAYOUT, n=1000) -> list[Check]:
    target = 1.0 if recovery else 0.5
    dev_total = dev_ch1 = dev_fid = 0.0
    for _ in range(n):
        q, p1, p2 = QubitState.random(rng), random_noise(rng), random_noise(rng)
        branches = decode(transmit(q, p1, p2, recovery, layout), recovery, layout)
        dev_total = max(dev_total, abs(accepted_probability(branches) - target))
        dev_ch1 = max(dev_ch1, abs(accepted_probability(branches, 1) - target / 2))
        dev_fid = max(dev_fid, 1.0 - min_fidelity(branches, q))
    tag = "recovery" if recovery else "no-recovery"
    return [
        Check(f"P_total ({tag})", 1e-9, dev_total, f"P_total = {target:g}"),
        Check(f"P_channel1 ({tag})", 1e-9, dev_ch1, f"P_ch1 = {target / 2:g}"),
        Check(f"fidelity ({tag})", 1e-9, dev_fid, "accepted branches vs input"),
    ]


def check_oracle(rng, layout=DEFAULT_LAYOUT, trials=100) -> list[Check]:
    basis = ModeBasis(tuple(layout.all_paths()))
    dev_cmp = dev_gram = 0.0
    for recovery, t_in in ((False, 1), (True, 0)):
        net = build_network(random_noise(rng), random_noise(rng), recovery, layout)
        domain = layout.input_labels(t_in)
        dev_cmp = max(dev_cmp, compare(net, basis, trials, rng, domain))
        dev_gram = max(dev_gram, gram_deviation(dense_matrix(net, basis, domain),
                                                basis, domain))
    return [Check("oracle-compare", 1e-12, dev_cmp, "sparse vs dense, full network"),
            Check("oracle-gram", 1e-12, dev_gram, "M^dagger M - I on inputs")]


def check_two_photon(rng, layout=DEFAULT_LAYOUT, n=100) -> list[Check]:
    dev_fid = dev_p = 0.0
    for _ in range(n):
        q = QubitState.random(rng)
        p1, p2 = random_noise(rng), random_noise(rng)
        for recovery in (False, True):
            res = two_photon_check(q.alpha, q.beta, p1, p2, recovery, layout)
            dev_fid = max(dev_fid, 1.0 - res.fidelity)
            dev_p = max(dev_p, abs(res.accepted_probability - (1.0 if recovery else 0.5)))
    return [Check("two-photon fidelity", 1e-9, dev_fid),
            Check("two-photon P_accept", 1e-9, dev_p)]


def run_all(seed: int = 2007, layout: NetworkLayout = DEFAULT_LAYOUT) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = [check_decoder_golden(rng, layout), check_unitarity(rng, layout)]
    checks += check_success(rng, False, layout)
    checks += check_success(rng, True, layout)
    checks += check_oracle(rng, layout)
    checks += check_two_photon(rng, layout)
    return checks


def tampered_bs(e: Element) -> Element:
    """Copy of a beam splitter whose reflection phase is -i instead of i.

    The descriptor is left intact, so the dense oracle still models a correct
    splitter. Negative control for the verification suite.
    """
    if e.kind != "bs":
        raise ValueError("tampered_bs expects a beam splitter")

    def rule(label: ModeLabel) -> Image:
        (through, t), (across, r) = e.image(label)
        return ((through, t), (across, -r))

    return Element(e.kind, dict(e.params), e.paths, e.outputs, rule)


class CorruptedLayout(NetworkLayout):
    """Layout whose channel-1 decoder has a tampered beam splitter."""

    @cached_property
    def decoders(self) -> tuple[Element, Element]:
        good1, good2 = super().decoders
        stages = list(good1.stages)
        stages[0] = tampered_bs(stages[0])
        return compose(stages), good2
