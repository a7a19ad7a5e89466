"""Exit criteria. Each test prints one PASS/FAIL line in the terminal summary."""

import math
import time

import numpy as np

from timebin_rejection.bb84 import Bb84Config, run
from timebin_rejection.checks import decoder_golden_amplitudes, random_noise
from timebin_rejection.network import DEFAULT_LAYOUT, build_network, transmit
from timebin_rejection.noise import FixedNoise, NoiseParams, UniformAngles
from timebin_rejection.oracle import ModeBasis, compare, dense_matrix, gram_deviation
from timebin_rejection.postselect import accepted_probability, decode, min_fidelity, two_photon_check
from timebin_rejection.state import QubitState

SEED = 2007
L = DEFAULT_LAYOUT


def samples(n, seed=SEED):
    rng = np.random.default_rng(seed)
    return [(QubitState.random(rng), random_noise(rng), random_noise(rng)) for _ in range(n)]


SAMPLES = samples(1000)


def test_1_decoder_golden(report):
    start = time.perf_counter()
    worst = 0.0
    ch1 = {L.port_path(1, "A"), L.port_path(1, "B")}
    for q, p1, p2 in SAMPLES[:100]:
        out = transmit(q, p1, p2)
        golden = decoder_golden_amplitudes(q, p1)
        labels = set(golden) | {l for l in out if l.spatial in ch1}
        worst = max(worst, max(abs(out.amplitude(l) - golden.get(l, 0j)) for l in labels))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    assert report(1, "channel-1 port amplitudes", ok,
                  f"max dev {worst:.2e} (tol 1e-12), {elapsed:.3f}s (< 1s)")


def _success(recovery):
    dev_total = dev_ch1 = dev_fid = 0.0
    totals = []
    target = 1.0 if recovery else 0.5
    start = time.perf_counter()
    for q, p1, p2 in SAMPLES:
        branches = decode(transmit(q, p1, p2, recovery), recovery)
        total = accepted_probability(branches)
        totals.append(total)
        dev_total = max(dev_total, abs(total - target))
        dev_ch1 = max(dev_ch1, abs(accepted_probability(branches, 1) - target / 2))
        dev_fid = max(dev_fid, 1.0 - min_fidelity(branches, q))
    return dev_total, dev_ch1, dev_fid, float(np.ptp(totals)), time.perf_counter() - start


def test_2_success_without_recovery(report):
    dev_total, dev_ch1, _, spread, elapsed = _success(False)
    ok = dev_total <= 1e-9 and dev_ch1 <= 1e-9 and spread <= 1e-9 and elapsed < 5
    assert report(2, "P_accept = 0.5, channel 1 = 0.25", ok,
                  f"dev {dev_total:.2e}/{dev_ch1:.2e}, spread {spread:.2e} (tol 1e-9), "
                  f"{elapsed:.2f}s (< 5s)")


def test_3_success_with_recovery(report):
    dev_total, _, _, spread, elapsed = _success(True)
    ok = dev_total <= 1e-9 and elapsed < 5
    assert report(3, "P_accept = 1 with recovery", ok,
                  f"dev {dev_total:.2e}, spread {spread:.2e} (tol 1e-9), {elapsed:.2f}s (< 5s)")


def test_4_fidelity(report):
    worst = max(_success(False)[2], _success(True)[2])
    assert report(4, "accepted fidelity = 1", worst <= 1e-9,
                  f"max 1-F {worst:.2e} (tol 1e-9) over 2000 decodes")


def test_5_oracle(report):
    rng = np.random.default_rng(SEED)
    basis = ModeBasis(tuple(L.all_paths()))
    start = time.perf_counter()
    dev_cmp = dev_gram = 0.0
    for recovery, t_in in ((False, 1), (True, 0)):
        net = build_network(random_noise(rng), random_noise(rng), recovery)
        dom = L.input_labels(t_in)
        dev_cmp = max(dev_cmp, compare(net, basis, 100, rng, dom))
        dev_gram = max(dev_gram, gram_deviation(dense_matrix(net, basis, dom), basis, dom))
    elapsed = time.perf_counter() - start
    ok = dev_cmp <= 1e-12 and dev_gram <= 1e-12 and elapsed < 1.0
    assert report(5, "dense oracle vs sparse, unitarity", ok,
                  f"amp dev {dev_cmp:.2e}, gram dev {dev_gram:.2e} (tol 1e-12), "
                  f"{elapsed:.3f}s (< 1s)")


def test_6_two_photon(report):
    dev_fid = dev_p = 0.0
    for q, p1, p2 in SAMPLES[:100]:
        for recovery in (False, True):
            res = two_photon_check(q.alpha, q.beta, p1, p2, recovery)
            single = accepted_probability(decode(transmit(q, p1, p2, recovery), recovery))
            dev_fid = max(dev_fid, 1.0 - res.fidelity)
            dev_p = max(dev_p, abs(res.accepted_probability - single))
    ok = dev_fid <= 1e-9 and dev_p <= 1e-9
    assert report(6, "entangled input", ok,
                  f"max 1-F {dev_fid:.2e}, |P - P_single| {dev_p:.2e} (tol 1e-9)")


def test_7_bb84(report):
    n = 100_000
    start = time.perf_counter()
    off = run(Bb84Config(n, UniformAngles(), SEED, recovery=False, protected=True))
    on = run(Bb84Config(n, UniformAngles(), SEED, recovery=True, protected=True))
    bare = run(Bb84Config(n, FixedNoise(NoiseParams(0.6, 0.8)), SEED, protected=False))
    elapsed = time.perf_counter() - start
    checks = {
        "qber_protected == 0": off.qber == 0.0 and on.qber == 0.0,
        "accepted(off) 0.5+-0.005": abs(off.accepted_fraction - 0.5) <= 0.005,
        "accepted(on) == 1": on.accepted_fraction == 1.0,
        "sifted 0.5+-0.005": all(abs(s.sifted_fraction - 0.5) <= 0.005 for s in (off, on, bare)),
        "qber_x(bare) 0.64+-0.005": abs(bare.qber_by_basis["X"] - 0.64) <= 0.005,
        "runtime < 30s": elapsed < 30,
    }
    detail = (f"qber {off.qber:g}/{on.qber:g}, accepted {off.accepted_fraction:.4f}/"
              f"{on.accepted_fraction:g}, sifted {off.sifted_fraction:.4f}/"
              f"{on.sifted_fraction:.4f}/{bare.sifted_fraction:.4f}, "
              f"bare qber_x {bare.qber_by_basis['X']:.4f}, {elapsed:.1f}s")
    failed = [k for k, v in checks.items() if not v]
    assert report(7, "BB84 n=1e5", not failed,
                  detail + (f"; failed: {failed}" if failed else "")), failed
