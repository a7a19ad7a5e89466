import math

import numpy as np
import pytest

from timebin_rejection.checks import decoder_golden_amplitudes
from timebin_rejection.network import (
    DEFAULT_LAYOUT,
    NetworkLayout,
    build_decoder,
    build_encoder,
    build_network,
    build_recovery,
    transmit,
)
from timebin_rejection.noise import NoiseParams, collective_noise
from timebin_rejection.optics import ConfigurationError, apply, check_isometry
from timebin_rejection.oracle import ModeBasis, dense_matrix
from timebin_rejection.state import ModeLabel, PhotonState, Pol, QubitState, embed_qubit

from conftest import random_params, random_qubit

R = 1 / math.sqrt(2)
H, V = Pol.H, Pol.V
L = DEFAULT_LAYOUT


def encode(q):
    return apply(build_encoder(), embed_qubit(q, L.a_in))


def test_encoder_h_input():
    assert dict(encode(QubitState(1, 0))) == pytest.approx(
        {ModeLabel("CH1", H, 0): R, ModeLabel("CH2", H, 0): 1j * R})


def test_encoder_v_input():
    assert dict(encode(QubitState(0, 1))) == pytest.approx(
        {ModeLabel("CH1", H, 1): 1j * R, ModeLabel("CH2", H, 1): R})


def test_encoder_general(rng):
    for _ in range(20):
        q = random_qubit(rng)
        s = encode(q)
        expected = {
            ModeLabel("CH1", H, 0): R * q.alpha, ModeLabel("CH1", H, 1): 1j * R * q.beta,
            ModeLabel("CH2", H, 0): 1j * R * q.alpha, ModeLabel("CH2", H, 1): R * q.beta,
        }
        assert set(s) <= set(expected)
        assert all(abs(s.amplitude(k) - v) < 1e-15 for k, v in expected.items())
        assert all(label.pol is H for label in s)


def channel1_input(q, p):
    a, b, d, e = q.alpha, q.beta, p.delta, p.eta
    return PhotonState({
        ModeLabel("CH1", H, 0): R * a * d, ModeLabel("CH1", V, 0): R * a * e,
        ModeLabel("CH1", H, 1): 1j * R * b * d, ModeLabel("CH1", V, 1): 1j * R * b * e,
    })


def test_channel_transit_matches_closed_form(rng):
    q, p = random_qubit(rng), random_params(rng)
    s = apply(collective_noise("CH1", p), encode(q))
    ch1 = PhotonState({k: v for k, v in s.items() if k.spatial == "CH1"})
    want = channel1_input(q, p)
    assert max(abs(ch1.amplitude(k) - want.amplitude(k)) for k in set(ch1) | set(want)) < 1e-15


def test_decoder_reproduces_port_amplitudes(rng):
    for _ in range(10):
        q, p = random_qubit(rng), random_params(rng)
        out = apply(build_decoder(1), channel1_input(q, p))
        golden = decoder_golden_amplitudes(q, p)
        assert set(out) <= set(golden)
        assert max(abs(out.amplitude(k) - v) for k, v in golden.items()) < 1e-12


def test_decoder_noiseless_port_b_dark():
    out = apply(build_decoder(1), channel1_input(QubitState(0.6, 0.8j), NoiseParams(1, 0)))
    assert all(label.spatial == "OUT1_A" for label in out)


def test_bad_channel():
    with pytest.raises(ConfigurationError):
        build_decoder(3)


def test_layout_requires_distinct_paths():
    with pytest.raises(ConfigurationError):
        NetworkLayout(a_s="A_in")


@pytest.mark.parametrize("stage", ["encoder", "decoder1", "decoder2", "recovery"])
def test_stages_are_isometries(stage):
    e = {"encoder": L.encoder, "decoder1": L.decoders[0], "decoder2": L.decoders[1],
         "recovery": L.recovery}[stage]
    assert check_isometry(e, e.domain(2)) <= 1e-12


def test_full_network_isometry(rng):
    net = build_network(random_params(rng), random_params(rng))
    assert check_isometry(net, L.input_labels(1)) <= 1e-12
    rec = build_network(random_params(rng), random_params(rng), recovery=True)
    assert check_isometry(rec, L.input_labels(0)) <= 1e-12


def test_transmit_noiseless_alpha_only():
    s = transmit(QubitState(1, 0), NoiseParams(1, 0), NoiseParams(1, 0))
    assert s
    assert all(l.spatial.endswith("_A") for l in s)
    # port A carries H at time 0 and V at time 1 from the alpha terms
    assert {(l.pol, l.time) for l in s} == {(H, 0), (V, 1)}


def test_transmit_support_and_norm(rng):
    outs = set(L.output_ports)
    for _ in range(1000):
        s = transmit(random_qubit(rng), random_params(rng), random_params(rng))
        assert abs(s.norm2() - 1) < 1e-12
        assert all(l.spatial in outs and l.time in (0, 1, 2) for l in s)


def test_transmit_port_b_mid_probability():
    # frozen from the dense oracle: both time-1 labels of port b carry |eta|^2/8
    q = QubitState(R, R)
    p = NoiseParams(3 / 5, 4j / 5)
    s = transmit(q, p, p)
    p_h = abs(s.amplitude(ModeLabel("OUT1_B", H, 1))) ** 2
    p_slot = sum(abs(v) ** 2 for k, v in s.items() if k.spatial == "OUT1_B" and k.time == 1)
    assert p_h == pytest.approx(0.08, abs=1e-12)
    assert p_slot == pytest.approx(0.16, abs=1e-12)

    basis = ModeBasis(tuple(L.all_paths()))
    w = dense_matrix(build_network(p, p), basis, L.input_labels(0)) @ basis.to_vector(
        embed_qubit(q, L.a_in))
    oracle = sum(abs(w[basis.idx("OUT1_B", pol, 1)]) ** 2 for pol in "HV")
    assert oracle == pytest.approx(p_slot, abs=1e-12)


def test_recovery_disabled_is_identity(rng):
    s = transmit(random_qubit(rng), random_params(rng), random_params(rng))
    assert apply(build_recovery(False), s) == s


def test_recovery_merges_port_a_edges():
    d, a, b = 0.6, 0.6, 0.8j
    s = PhotonState({ModeLabel("OUT1_A", H, 0): a * d / 2, ModeLabel("OUT1_A", V, 2): -b * d / 2})
    out = apply(build_recovery(True), s)
    assert dict(out) == pytest.approx({ModeLabel("OUT1_A", H, 2): a * d / 2,
                                       ModeLabel("OUT1_A", V, 2): -b * d / 2})
    assert out.norm2() == pytest.approx(abs(d) ** 2 / 4 * (abs(a) ** 2 + abs(b) ** 2))


def test_recovery_properties(rng):
    for _ in range(100):
        q, p1, p2 = random_qubit(rng), random_params(rng), random_params(rng)
        plain = transmit(q, p1, p2)
        rec = transmit(q, p1, p2, recovery=True)
        assert any(l.time == 0 for l in plain) or abs(p1.delta) < 1e-7
        assert not any(l.time == 0 for l in rec)
        assert abs(rec.norm2() - 1) < 1e-12
        mid_plain = {k: v for k, v in plain.items() if k.time == 1}
        mid_rec = {k: v for k, v in rec.items() if k.time == 1}
        assert mid_plain == mid_rec
