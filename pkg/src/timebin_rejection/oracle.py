"""Dense-matrix reference for the sparse element algebra.

Matrices are rebuilt from each element's descriptor (``kind`` and
``params``) by index arithmetic over an explicit, finite mode basis. The
sparse rules are never consulted, so agreement between :func:`dense_matrix`
and :func:`timebin_rejection.optics.apply` is a genuine cross-check.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .optics import Element, apply
from .state import ModeLabel, PhotonState, Pol

DEFAULT_T_MAX = 4


class BasisTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class ModeBasis:
    """All ``paths x {H, V} x {0..t_max}``, ordered by (path, pol, time)."""

    paths: tuple[str, ...]
    t_max: int = DEFAULT_T_MAX

    def __post_init__(self) -> None:
        object.__setattr__(self, "paths", tuple(sorted(set(self.paths))))

    @classmethod
    def for_element(cls, e: Element, t_max: int = DEFAULT_T_MAX) -> ModeBasis:
        return cls(tuple(e.paths | e.outputs), t_max)

    @cached_property
    def labels(self) -> list[ModeLabel]:
        return [ModeLabel(p, pol, t) for p in self.paths for pol in Pol
                for t in range(self.t_max + 1)]

    @cached_property
    def index(self) -> dict[tuple[str, str, int], int]:
        return {(l.spatial, l.pol.value, l.time): i for i, l in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def idx(self, spatial: str, pol: str, time: int) -> int | None:
        return self.index.get((spatial, pol, time))

    def to_vector(self, s: PhotonState) -> np.ndarray:
        v = np.zeros(len(self), dtype=complex)
        for label, amp in s.items():
            i = self.idx(label.spatial, label.pol.value, label.time)
            if i is None:
                raise BasisTooSmall(f"basis too small: {label!r} not in basis")
            v[i] = amp
        return v

    def to_state(self, v: np.ndarray) -> PhotonState:
        return PhotonState({l: v[i] for i, l in enumerate(self.labels) if v[i] != 0})


def _blank(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.eye(n, dtype=complex), np.zeros(n, dtype=bool)


def _set_column(M, poison, col, entries):
    M[:, col] = 0
    for row, val in entries:
        if row is None:
            poison[col] = True
        else:
            M[row, col] += val


def _dense_primitive(e: Element, basis: ModeBasis) -> tuple[np.ndarray, np.ndarray]:
    n = len(basis)
    M, poison = _blank(n)
    p = e.params
    T = range(basis.t_max + 1)
    ix = basis.idx
    if e.kind == "identity":
        pass
    elif e.kind == "pbs":
        route = {(p["in1"], "H"): p["out_ta"], (p["in1"], "V"): p["out_tb"],
                 (p["in2"], "H"): p["out_tb"], (p["in2"], "V"): p["out_ta"]}
        for (src, pol), dst in route.items():
            for t in T:
                _set_column(M, poison, ix(src, pol, t), [(ix(dst, pol, t), 1.0)])
    elif e.kind == "bs":
        r = 1 / math.sqrt(2)
        pairs = {p["in1"]: (p["out1"], p["out2"]), p["in2"]: (p["out2"], p["out1"])}
        for src, (through, across) in pairs.items():
            for pol in "HV":
                for t in T:
                    _set_column(M, poison, ix(src, pol, t),
                                [(ix(through, pol, t), r), (ix(across, pol, t), 1j * r)])
    elif e.kind == "hwp":
        for pol, other in (("H", "V"), ("V", "H")):
            for t in T:
                _set_column(M, poison, ix(p["spatial"], pol, t),
                            [(ix(p["spatial"], other, t), 1.0)])
    elif e.kind in ("delay", "phase"):
        gate_pol = None if p["pol"] is None else Pol(p["pol"]).value
        for pol in "HV":
            for t in T:
                if gate_pol not in (None, pol) or p["time"] not in (None, t):
                    continue
                col = ix(p["spatial"], pol, t)
                if e.kind == "delay":
                    _set_column(M, poison, col, [(ix(p["spatial"], pol, t + p["k"]), 1.0)])
                else:
                    M[col, col] = p["phase"]
    elif e.kind == "noise":
        d, eta = p["delta"], p["eta"]
        s = p["spatial"]
        for t in T:
            h, v = ix(s, "H", t), ix(s, "V", t)
            _set_column(M, poison, h, [(h, d), (v, eta)])
            _set_column(M, poison, v, [(h, -np.conj(eta)), (v, np.conj(d))])
    else:
        raise ValueError(f"no dense model for element kind {e.kind!r}")
    return M, poison


def _dense(e: Element, basis: ModeBasis) -> tuple[np.ndarray, np.ndarray]:
    missing = (e.paths | e.outputs) - set(basis.paths)
    if missing:
        raise BasisTooSmall(f"basis too small: paths {sorted(missing)} missing")
    if not e.stages:
        return _dense_primitive(e, basis)
    M, poison = _blank(len(basis))
    for stage in e.stages:
        S, sp = _dense_primitive(stage, basis)
        # a column is poisoned if it ever routes amplitude through a poisoned one
        poison = poison | ((np.abs(M) > 0).T @ sp)
        M = S @ M
    return M, poison


def dense_matrix(e: Element, basis: ModeBasis,
                 domain: Iterable[ModeLabel] | None = None) -> np.ndarray:
    """Explicit matrix of ``e`` over ``basis``.

    Raises :class:`BasisTooSmall` if any column in ``domain`` (default: the
    whole basis) would be carried past ``t_max``.
    """
    M, poison = _dense(e, basis)
    cols = _columns(basis, domain)
    bad = [basis.labels[c] for c in cols if poison[c]]
    if bad:
        raise BasisTooSmall(f"basis too small: {bad[0]!r} leaves the basis")
    return M


def _columns(basis: ModeBasis, domain: Iterable[ModeLabel] | None) -> list[int]:
    if domain is None:
        return list(range(len(basis)))
    cols = []
    for l in domain:
        i = basis.idx(l.spatial, l.pol.value, l.time)
        if i is None:
            raise BasisTooSmall(f"basis too small: {l!r} not in basis")
        cols.append(i)
    return cols


def gram_deviation(M: np.ndarray, basis: ModeBasis,
                   domain: Iterable[ModeLabel] | None = None) -> float:
    """max |(M^dagger M - I)| restricted to the domain columns."""
    cols = _columns(basis, domain)
    sub = M[:, cols]
    return float(np.max(np.abs(sub.conj().T @ sub - np.eye(len(cols)))))


def compare(e: Element, basis: ModeBasis, trials: int, rng: np.random.Generator,
            domain: Sequence[ModeLabel] | None = None) -> float:
    """Max amplitude gap between sparse ``apply`` and the dense product.

    Inputs are random normalized complex vectors supported on ``domain``.
    """
    M = dense_matrix(e, basis, domain)
    cols = _columns(basis, domain)
    worst = 0.0
    for _ in range(trials):
        v = np.zeros(len(basis), dtype=complex)
        v[cols] = rng.normal(size=len(cols)) + 1j * rng.normal(size=len(cols))
        v /= np.linalg.norm(v)
        sparse = basis.to_vector(apply(e, basis.to_state(v)))
        worst = max(worst, float(np.max(np.abs(sparse - M @ v))))
    return worst
