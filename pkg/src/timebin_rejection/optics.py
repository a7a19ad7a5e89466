"""Linear-optical elements as partial isometries on mode labels.

Every element acts as the identity on labels outside its declared paths, so a
whole set-up is one composed element over the global label space. Besides its
sparse rule, each primitive carries a plain descriptor (``kind`` and
``params``) from which :mod:`timebin_rejection.oracle` rebuilds a dense matrix
without touching the rule.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from types import MappingProxyType
from typing import Any

from .state import (
    PRUNE,
    ModeLabel,
    PhotonState,
    Pol,
    basis_state,
    inner_product,
    unit_phase,
)

Image = tuple[tuple[ModeLabel, complex], ...]
Rule = Callable[[ModeLabel], "Image | None"]

_S = 1.0 / math.sqrt(2.0)


class ConfigurationError(ValueError):
    """Raised for an ill-formed optical element or network."""


class Element:
    """A linear map on the mode-label space.

    Parameters
    ----------
    kind : str
        Descriptor name (``"pbs"``, ``"bs"``, ``"hwp"``, ``"delay"``,
        ``"phase"``, ``"noise"``, ``"identity"`` or ``"compose"``).
    params : dict
        Descriptor parameters, enough to rebuild the element independently.
    paths : iterable of str
        Spatial paths whose labels the rule may act on.
    outputs : iterable of str
        Spatial paths the element may write to.
    rule : callable, optional
        Maps a label on ``paths`` to its image, or ``None`` for pass-through.
    stages : sequence of Element, optional
        For composites: stages in application order.
    """

    __slots__ = ("kind", "params", "paths", "outputs", "_rule", "stages", "_cache")

    def __init__(self, kind: str, params: dict[str, Any], paths: Iterable[str],
                 outputs: Iterable[str], rule: Rule | None = None,
                 stages: Sequence[Element] = ()):
        self.kind = kind
        self.params = MappingProxyType(dict(params))
        self.paths = frozenset(paths)
        self.outputs = frozenset(outputs)
        self._rule = rule
        self.stages = tuple(stages)
        self._cache: dict[ModeLabel, Image] = {}

    def __repr__(self) -> str:
        if self.stages:
            return f"Element(compose, {len(self.stages)} stages)"
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"Element({self.kind}, {args})"

    def image(self, label: ModeLabel) -> Image:
        """Image of one basis label as ``((label, coeff), ...)``."""
        img = self._cache.get(label)
        if img is not None:
            return img
        if self.stages:
            vec: dict[ModeLabel, complex] = {label: 1 + 0j}
            for stage in self.stages:
                vec = _push(stage, vec)
            img = tuple(vec.items())
        elif label.spatial in self.paths:
            img = self._rule(label)
            if img is None:
                img = ((label, 1 + 0j),)
        else:
            img = ((label, 1 + 0j),)
        self._cache[label] = img
        return img

    def domain(self, t_max: int = 1) -> list[ModeLabel]:
        """Labels on which the element is declared isometric, times 0..t_max.

        For a primitive: every label on its paths, except pass-through labels
        that a matched label is mapped onto (those would collide). For a
        composite: the union of stage domains over paths not written by an
        earlier stage, i.e. the open input ports.
        """
        if self.stages:
            produced: set[str] = set()
            labels: list[ModeLabel] = []
            for stage in self.stages:
                labels += [l for l in stage.domain(t_max) if l.spatial not in produced]
                produced |= stage.outputs
            return sorted(set(labels))
        candidates = [ModeLabel(p, pol, t) for p in sorted(self.paths)
                      for pol in Pol for t in range(t_max + 1)]
        matched = [l for l in candidates if self._rule(l) is not None]
        targets = {out for l in matched for out, _ in self._rule(l)}
        matched_set = set(matched)
        return [l for l in candidates if l in matched_set or l not in targets]


def _push(e: Element, vec: dict[ModeLabel, complex]) -> dict[ModeLabel, complex]:
    out: dict[ModeLabel, complex] = {}
    image = e.image
    for label, amp in vec.items():
        for target, coeff in image(label):
            out[target] = out.get(target, 0j) + amp * coeff
    return {k: v for k, v in out.items() if abs(v) >= PRUNE}


def apply(e: Element, s: PhotonState) -> PhotonState:
    """Linear extension of ``e`` applied to ``s``; output pruned."""
    return PhotonState._trusted(_push(e, s._amps))


def _distinct(*paths: str) -> None:
    if len(set(paths)) != len(paths):
        raise ConfigurationError(f"path ids must be distinct, got {paths}")


def identity() -> Element:
    return Element("identity", {}, (), ())


def make_pbs(in1: str, in2: str, out_ta: str, out_tb: str) -> Element:
    """Polarizing beam splitter: H transmitted, V reflected, no reflection phase.

    ``in1``: H -> ``out_ta``, V -> ``out_tb``; ``in2``: H -> ``out_tb``,
    V -> ``out_ta``.
    """
    _distinct(in1, in2, out_ta, out_tb)
    route = {
        (in1, Pol.H): out_ta, (in1, Pol.V): out_tb,
        (in2, Pol.H): out_tb, (in2, Pol.V): out_ta,
    }

    def rule(label: ModeLabel) -> Image:
        return ((label.moved(route[label.spatial, label.pol]), 1 + 0j),)

    return Element("pbs", dict(in1=in1, in2=in2, out_ta=out_ta, out_tb=out_tb),
                   (in1, in2), (out_ta, out_tb), rule)


def make_bs(in1: str, in2: str, out1: str, out2: str) -> Element:
    """50/50 beam splitter; the reflected amplitude picks up a factor i."""
    _distinct(in1, in2, out1, out2)
    through = {in1: out1, in2: out2}
    across = {in1: out2, in2: out1}

    def rule(label: ModeLabel) -> Image:
        return ((label.moved(through[label.spatial]), _S + 0j),
                (label.moved(across[label.spatial]), 1j * _S))

    return Element("bs", dict(in1=in1, in2=in2, out1=out1, out2=out2),
                   (in1, in2), (out1, out2), rule)


def make_hwp(spatial: str) -> Element:
    """Half-wave plate swapping H and V on one path."""

    def rule(label: ModeLabel) -> Image:
        return ((label.with_pol(label.pol.flipped()), 1 + 0j),)

    return Element("hwp", dict(spatial=spatial), (spatial,), (spatial,), rule)


def _matches(label: ModeLabel, pol: Pol | None, time: int | None) -> bool:
    return (pol is None or label.pol is pol) and (time is None or label.time == time)


def make_delay(spatial: str, k: int, pol: Pol | str | None = None,
               time: int | None = None) -> Element:
    """Delay line adding ``k`` time bins on ``spatial``.

    With ``pol`` and/or ``time`` given, only matching labels are delayed (a
    gated delay); the element is then isometric only on its declared domain.
    """
    if int(k) != k or k < 1:
        raise ConfigurationError(f"delay must be a positive integer, got {k!r}")
    k = int(k)
    pol = None if pol is None else Pol(pol)

    def rule(label: ModeLabel) -> Image | None:
        if _matches(label, pol, time):
            return ((label.shifted(k), 1 + 0j),)
        return None

    return Element("delay", dict(spatial=spatial, k=k, pol=pol, time=time),
                   (spatial,), (spatial,), rule)


def make_phase(spatial: str, phase: complex, pol: Pol | str | None = None,
               time: int | None = None) -> Element:
    """Multiply matching labels on ``spatial`` by a unit-modulus ``phase``."""
    phase = unit_phase(phase)
    pol = None if pol is None else Pol(pol)

    def rule(label: ModeLabel) -> Image | None:
        if _matches(label, pol, time):
            return ((label, phase),)
        return None

    return Element("phase", dict(spatial=spatial, phase=phase, pol=pol, time=time),
                   (spatial,), (spatial,), rule)


def compose(elements: Sequence[Element]) -> Element:
    """Sequential product; the first listed element is applied first."""
    if not elements:
        raise ConfigurationError("compose needs at least one element")
    stages: list[Element] = []
    for e in elements:
        stages.extend(e.stages if e.stages else (e,))
    paths = frozenset().union(*(e.paths for e in stages))
    outputs = frozenset().union(*(e.outputs for e in stages))
    return Element("compose", {}, paths, outputs, stages=stages)


def check_isometry(e: Element, domain: Sequence[ModeLabel]) -> float:
    """Max |<e x, e y> - <x, y>| over all pairs of domain labels."""
    if not domain:
        raise ConfigurationError("check_isometry needs a nonempty domain")
    images = [apply(e, basis_state(l)) for l in domain]
    worst = 0.0
    for i, a in enumerate(images):
        for j in range(i, len(images)):
            expected = 1.0 if i == j else 0.0
            worst = max(worst, abs(inner_product(a, images[j]) - expected))
    return worst
