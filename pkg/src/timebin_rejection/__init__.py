"""Linear-optics simulation of ancilla-free time-bin rejection of collective noise."""

from .network import NetworkLayout, build_decoder, build_encoder, build_recovery, transmit
from .noise import FixedNoise, NoiseParams, SlowDrift, UniformAngles, collective_noise, sample_noise
from .optics import (
    ConfigurationError,
    Element,
    apply,
    check_isometry,
    compose,
    make_bs,
    make_delay,
    make_hwp,
    make_pbs,
    make_phase,
)
from .postselect import Correction, Outcome, Pauli, decode, outcome_table, sweep, two_photon_check
from .state import (
    ModeLabel,
    PhotonState,
    Pol,
    QubitState,
    TwoPhotonState,
    embed_qubit,
    fidelity_to_qubit,
    filter_state,
    inner_product,
)

__version__ = "0.1.0"
