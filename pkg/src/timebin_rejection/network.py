"""The sender/receiver set-up: encoder, two decoders and optional recovery.

Alice's unbalanced interferometer (PBS, delayed HWP arm, BS) turns a
polarization qubit into two H-polarized time-bin packets on each of the two
channels. Each of Bob's decoders (BS, delayed HWP arm, PBS) spreads the
received photon over two output ports and three arrival times 0, 1, 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .noise import IDENTITY_NOISE, NoiseParams, collective_noise
from .optics import (
    ConfigurationError,
    Element,
    apply,
    compose,
    identity,
    make_bs,
    make_delay,
    make_hwp,
    make_pbs,
)
from .state import ModeLabel, PhotonState, Pol, QubitState, embed_qubit

CHANNELS = (1, 2)
PORTS = ("A", "B")


@dataclass(frozen=True)
class NetworkLayout:
    """Path ids of every segment. ``*_IN2`` are the unused (vacuum) inputs."""

    a_in: str = "A_in"
    a_in2: str = "A_IN2"
    a_s: str = "A_S"
    a_l: str = "A_L"
    ch: tuple[str, str] = ("CH1", "CH2")
    b_in2: tuple[str, str] = ("B1_IN2", "B2_IN2")
    b_s: tuple[str, str] = ("B1_S", "B2_S")
    b_l: tuple[str, str] = ("B1_L", "B2_L")
    out_a: tuple[str, str] = ("OUT1_A", "OUT2_A")
    out_b: tuple[str, str] = ("OUT1_B", "OUT2_B")

    def __post_init__(self) -> None:
        ids = self.all_paths()
        if len(set(ids)) != len(ids):
            raise ConfigurationError("network path ids must be distinct")

    def all_paths(self) -> list[str]:
        ids = [self.a_in, self.a_in2, self.a_s, self.a_l]
        for group in (self.ch, self.b_in2, self.b_s, self.b_l, self.out_a, self.out_b):
            ids.extend(group)
        return ids

    def channel_path(self, channel: int) -> str:
        return self.ch[_index(channel)]

    def port_path(self, channel: int, port: str) -> str:
        i = _index(channel)
        return {"A": self.out_a, "B": self.out_b}[port][i]

    @cached_property
    def output_ports(self) -> dict[str, tuple[int, str]]:
        """Output path id -> (channel, port)."""
        return {self.port_path(c, p): (c, p) for c in CHANNELS for p in PORTS}

    @cached_property
    def encoder(self) -> Element:
        return build_encoder(self)

    @cached_property
    def decoders(self) -> tuple[Element, Element]:
        return build_decoder(1, self), build_decoder(2, self)

    @cached_property
    def recovery(self) -> Element:
        return build_recovery(True, self)

    def receiver(self, recovery: bool) -> Element:
        """Both decoders, followed by the recovery delays if requested."""
        return self._receivers[bool(recovery)]

    @cached_property
    def _receivers(self) -> dict[bool, Element]:
        return {False: compose(self.decoders),
                True: compose([*self.decoders, self.recovery])}

    def input_labels(self, t_max: int = 0) -> list[ModeLabel]:
        """Open input ports of the whole set-up."""
        paths = (self.a_in, self.a_in2) + self.b_in2
        return [ModeLabel(p, pol, t) for p in paths for pol in Pol
                for t in range(t_max + 1)]


def _index(channel: int) -> int:
    if channel not in CHANNELS:
        raise ConfigurationError(f"channel must be 1 or 2, got {channel!r}")
    return channel - 1


DEFAULT_LAYOUT = NetworkLayout()


def build_encoder(layout: NetworkLayout = DEFAULT_LAYOUT) -> Element:
    """PBS -> one-bin delay and HWP on the long arm -> BS onto CH1/CH2."""
    L = layout
    return compose([
        make_pbs(L.a_in, L.a_in2, L.a_s, L.a_l),
        make_delay(L.a_l, 1),
        make_hwp(L.a_l),
        make_bs(L.a_s, L.a_l, L.ch[0], L.ch[1]),
    ])


def build_decoder(channel: int, layout: NetworkLayout = DEFAULT_LAYOUT) -> Element:
    """BS -> one-bin delay and HWP on the long arm -> PBS onto ports A/B.

    The short arm feeds the first PBS input, so port A collects transmitted H
    from the short arm and reflected V from the long arm.
    """
    L = layout
    i = _index(channel)
    return compose([
        make_bs(L.ch[i], L.b_in2[i], L.b_s[i], L.b_l[i]),
        make_delay(L.b_l[i], 1),
        make_hwp(L.b_l[i]),
        make_pbs(L.b_s[i], L.b_l[i], L.out_a[i], L.out_b[i]),
    ])


def build_recovery(enabled: bool, layout: NetworkLayout = DEFAULT_LAYOUT) -> Element:
    """Delay the early (time-0) packet of every port by two bins.

    The early packet then lands on the late (time-2) packet of the same port,
    with orthogonal polarization, forming one correctable qubit. Port A only
    carries H at time 0 and port B only V, so the gate is set on that
    polarization. The mid (time-1) packet is left alone.
    """
    if not enabled:
        return identity()
    stages = []
    for c in CHANNELS:
        stages.append(make_delay(layout.port_path(c, "A"), 2, pol=Pol.H, time=0))
        stages.append(make_delay(layout.port_path(c, "B"), 2, pol=Pol.V, time=0))
    return compose(stages)


def build_network(noise1: NoiseParams = IDENTITY_NOISE,
                  noise2: NoiseParams = IDENTITY_NOISE, recovery: bool = False,
                  layout: NetworkLayout = DEFAULT_LAYOUT) -> Element:
    """The full chain as one composed element."""
    stages = [
        layout.encoder,
        collective_noise(layout.ch[0], noise1),
        collective_noise(layout.ch[1], noise2),
        *layout.decoders,
    ]
    if recovery:
        stages.append(layout.recovery)
    return compose(stages)


def transmit(q: QubitState, noise1: NoiseParams, noise2: NoiseParams,
             recovery: bool = False,
             layout: NetworkLayout = DEFAULT_LAYOUT) -> PhotonState:
    """Send ``q`` from Alice's input through both noisy channels to Bob's ports."""
    s = apply(layout.encoder, embed_qubit(q, layout.a_in, 0))
    s = apply(collective_noise(layout.ch[0], noise1), s)
    s = apply(collective_noise(layout.ch[1], noise2), s)
    return apply(layout.receiver(recovery), s)

