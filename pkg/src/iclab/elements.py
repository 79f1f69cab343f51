"""Optical elements, preset interferometers and the text config format.

Sign conventions follow the transfer matrices of the boosted Mandel setup:

* two-mode squeezer on (i, j):  a_i -> mu a_i - nu a_j^dag,
  with mu = cosh r, nu = exp(i psi) sinh r
* phase shift:                  a -> exp(i phi) a
* beam splitter (theta):        a_i -> cos(theta) a_i + i sin(theta) a_j

Modes a, b, c are indices 0, 1, 2.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from iclab.gaussian import BogoliubovTransform, compose_chain

MODE_NAMES = "abc"


@dataclass(frozen=True)
class TwoModeSqueezer:
    i: int
    j: int
    r: float
    psi: float = 0.0


@dataclass(frozen=True)
class PhaseShift:
    mode: int
    phi: float = 0.0


@dataclass(frozen=True)
class BeamSplitter:
    i: int
    j: int
    theta: float = math.pi / 4


Element = Union[TwoModeSqueezer, PhaseShift, BeamSplitter]


def element_modes(e: Element) -> tuple[int, ...]:
    if isinstance(e, PhaseShift):
        return (e.mode,)
    return (e.i, e.j)


def _check_element(e: Element, mode_count: int) -> None:
    modes = element_modes(e)
    for m in modes:
        if not 0 <= m < mode_count:
            raise ValueError(f"mode index {m} out of range for {mode_count} modes in {e}")
    if len(set(modes)) != len(modes):
        raise ValueError(f"element acts twice on the same mode: {e}")
    if isinstance(e, TwoModeSqueezer) and e.r < 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {e.r}")


def element_matrices(e: Element, mode_count: int) -> tuple[np.ndarray, np.ndarray]:
    """``(U, V)`` arrays of one element, unchecked. Used on the hot path."""
    U = np.eye(mode_count, dtype=complex)
    V = np.zeros((mode_count, mode_count), dtype=complex)
    if isinstance(e, TwoModeSqueezer):
        mu = math.cosh(e.r)
        nu = np.exp(1j * e.psi) * math.sinh(e.r)
        U[e.i, e.i] = U[e.j, e.j] = mu
        V[e.i, e.j] = V[e.j, e.i] = -nu
    elif isinstance(e, PhaseShift):
        U[e.mode, e.mode] = np.exp(1j * e.phi)
    elif isinstance(e, BeamSplitter):
        c, s = math.cos(e.theta), math.sin(e.theta)
        U[e.i, e.i] = U[e.j, e.j] = c
        U[e.i, e.j] = U[e.j, e.i] = 1j * s
    else:
        raise TypeError(f"not an element: {e!r}")
    return U, V


def build_element(e: Element, mode_count: int) -> BogoliubovTransform:
    _check_element(e, mode_count)
    return BogoliubovTransform(*element_matrices(e, mode_count))


def phase_derivative(e: PhaseShift, mode_count: int) -> tuple[np.ndarray, np.ndarray]:
    """d/dphi of the phase element's ``(U, V)``."""
    dU = np.zeros((mode_count, mode_count), dtype=complex)
    dU[e.mode, e.mode] = 1j * np.exp(1j * e.phi)
    return dU, np.zeros_like(dU)


@dataclass(frozen=True)
class InterferometerSpec:
    """Ordered element list, coherent seeds, and the probe phase.

    ``elements[probe_index]`` must be a :class:`PhaseShift`; its phase is
    taken from ``working_point`` whenever the spec is evaluated.
    """

    mode_count: int
    elements: tuple
    seeds: tuple
    probe_index: int
    working_point: float = 0.0
    detector: str | None = field(default=None, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "seeds", tuple(complex(s) for s in self.seeds))
        if self.mode_count < 1:
            raise ValueError("mode count must be positive")
        if len(self.seeds) != self.mode_count:
            raise ValueError(f"expected {self.mode_count} seeds, got {len(self.seeds)}")
        for e in self.elements:
            _check_element(e, self.mode_count)
        if not 0 <= self.probe_index < len(self.elements):
            raise ValueError(f"probe index {self.probe_index} out of range")
        if not isinstance(self.elements[self.probe_index], PhaseShift):
            raise ValueError("probe element must be a phase shift")
        probe = self.elements[self.probe_index]
        if probe.phi != self.working_point:
            els = list(self.elements)
            els[self.probe_index] = replace(probe, phi=float(self.working_point))
            object.__setattr__(self, "elements", tuple(els))

    @property
    def probe(self) -> PhaseShift:
        return self.elements[self.probe_index]

    def at(self, working_point: float) -> "InterferometerSpec":
        return replace(self, working_point=float(working_point))

    def stacks(self) -> tuple[np.ndarray, np.ndarray]:
        """Element ``(U, V)`` arrays stacked in application order."""
        mats = [element_matrices(e, self.mode_count) for e in self.elements]
        return np.stack([m[0] for m in mats]), np.stack([m[1] for m in mats])

    def transform(self) -> BogoliubovTransform:
        return compose_chain(build_element(e, self.mode_count) for e in self.elements)


def mandel_preset(r1, r2, psi1=0.0, psi2=0.0, phi=0.0, seeds=(0, 0, 0)) -> InterferometerSpec:
    """Boosted induced-coherence setup: S1(a,b), phase on a, S2(a,c), 50:50 BS(b,c)."""
    if r1 < 0 or r2 < 0:
        raise ValueError("squeezing parameters must be >= 0")
    return InterferometerSpec(
        3,
        (
            TwoModeSqueezer(0, 1, r1, psi1),
            PhaseShift(0, phi),
            TwoModeSqueezer(0, 2, r2, psi2),
            BeamSplitter(1, 2),
        ),
        seeds,
        probe_index=1,
        working_point=phi,
    )


def yurke_preset(r, phi=0.0, seeds=(0, 0)) -> InterferometerSpec:
    """SU(1,1) interferometer; the second squeezer is anti-phased (psi = pi)
    so the chain is the identity at ``phi = 0``."""
    if r < 0:
        raise ValueError("squeezing parameter must be >= 0")
    return InterferometerSpec(
        2,
        (TwoModeSqueezer(0, 1, r, 0.0), PhaseShift(0, phi), TwoModeSqueezer(0, 1, r, math.pi)),
        seeds,
        probe_index=1,
        working_point=phi,
    )


def mzi_preset(phi=0.0, seeds=(0, 0)) -> InterferometerSpec:
    """Balanced Mach-Zehnder: BS, phase on arm a, BS."""
    return InterferometerSpec(
        2,
        (BeamSplitter(0, 1), PhaseShift(0, phi), BeamSplitter(0, 1)),
        seeds,
        probe_index=1,
        working_point=phi,
    )


# -- config format --------------------------------------------------------------


class ConfigError(ValueError):
    """Bad interferometer config. ``where`` is a line number or field path."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


_ELEMENT_KEYS = {
    "squeezer": {"type", "modes", "r", "psi"},
    "phase": {"type", "mode", "phi", "probe", "at"},
    "bs": {"type", "modes", "theta"},
}
#: top-level keys; ``axis`` and ``optimize`` may repeat and are only read by sweeps
TOP_KEYS = {"modes", "seeds", "detector", "axis", "optimize"}

_TOKEN = re.compile(r"(\w+)\s*=\s*(\[[^\]]*\]|\S+)")


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    if t.endswith("j") and (t == "j" or t[-2:-1] in "+-"):
        t = t[:-1] + "1j"
    return complex(t)


def _parse_list(text: str, conv, where: str) -> list:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ConfigError(f"expected a [..] list, got {text!r}", where)
    body = text[1:-1].strip()
    if not body:
        return []
    try:
        return [conv(x) for x in body.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad list entry in {text!r}: {exc}", where) from None


def _parse_bool(text: str) -> bool:
    t = text.lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _element_from_fields(fields: dict, path: str):
    """Returns ``(element, is_probe, working_point)``."""
    kind = fields.get("type")
    if kind is None:
        raise ConfigError("missing field", f"{path}.type")
    if kind not in _ELEMENT_KEYS:
        raise ConfigError(f"unknown element type {kind!r}", f"{path}.type")
    unknown = set(fields) - _ELEMENT_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)}", f"{path}.{sorted(unknown)[0]}")

    def num(key, default=None):
        if key not in fields:
            if default is None:
                raise ConfigError("missing field", f"{path}.{key}")
            return default
        try:
            return float(fields[key])
        except ValueError:
            raise ConfigError(f"not a number: {fields[key]!r}", f"{path}.{key}") from None

    def pair():
        if "modes" not in fields:
            raise ConfigError("missing field", f"{path}.modes")
        m = _parse_list(fields["modes"], int, f"{path}.modes")
        if len(m) != 2:
            raise ConfigError(f"expected two modes, got {m}", f"{path}.modes")
        return m

    if kind == "squeezer":
        i, j = pair()
        r = num("r")
        if r < 0:
            raise ConfigError("squeezing parameter must be >= 0", f"{path}.r")
        return TwoModeSqueezer(i, j, r, num("psi", 0.0)), False, None
    if kind == "bs":
        i, j = pair()
        return BeamSplitter(i, j, num("theta", math.pi / 4)), False, None
    if "mode" not in fields:
        raise ConfigError("missing field", f"{path}.mode")
    try:
        mode = int(fields["mode"])
    except ValueError:
        raise ConfigError(f"not an integer: {fields['mode']!r}", f"{path}.mode") from None
    try:
        probe = _parse_bool(fields.get("probe", "false"))
    except ValueError as exc:
        raise ConfigError(str(exc), f"{path}.probe") from None
    phi = num("phi", 0.0)
    at = num("at", phi) if probe else None
    return PhaseShift(mode, phi), probe, at


def parse_spec(text: str) -> InterferometerSpec:
    """Parse the ``key = value`` / ``[element]`` config format."""
    spec, _ = parse_config(text)
    return spec


def parse_config(text: str) -> tuple[InterferometerSpec, dict]:
    """Parse a config; also return sweep extras (``axis``/``optimize`` lists)."""
    top: dict = {}
    extras: dict = {"axis": [], "optimize": []}
    elements = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("[element]"):
            rest = line[len("[element]"):]
            fields = {}
            pos = 0
            for m in _TOKEN.finditer(rest):
                if rest[pos:m.start()].strip():
                    raise ConfigError(f"cannot parse {rest[pos:m.start()].strip()!r}", where)
                if m.group(1) in fields:
                    raise ConfigError(f"duplicate key {m.group(1)!r}", where)
                fields[m.group(1)] = m.group(2)
                pos = m.end()
            if rest[pos:].strip():
                raise ConfigError(f"cannot parse {rest[pos:].strip()!r}", where)
            elements.append((lineno, fields))
            continue
        if line.startswith("["):
            raise ConfigError(f"unknown section {line.split()[0]!r}", where)
        if "=" not in line:
            raise ConfigError("expected 'key = value'", where)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in TOP_KEYS:
            raise ConfigError(f"unknown key {key!r}", where)
        if key in ("axis", "optimize"):
            extras[key].append(value)
            continue
        if key in top:
            raise ConfigError(f"duplicate key {key!r}", where)
        top[key] = (lineno, value)

    if "modes" not in top:
        raise ConfigError("missing field", "modes")
    try:
        mode_count = int(top["modes"][1])
    except ValueError:
        raise ConfigError(f"not an integer: {top['modes'][1]!r}", "modes") from None
    if "seeds" in top:
        seeds = _parse_list(top["seeds"][1], parse_complex, "seeds")
    else:
        seeds = [0j] * mode_count
    if "detector" in top:
        extras["detector"] = top["detector"][1]

    els = []
    probe_index = None
    working_point = 0.0
    for n, (lineno, fields) in enumerate(elements):
        e, is_probe, at = _element_from_fields(fields, f"elements[{n}]")
        if is_probe:
            if probe_index is not None:
                raise ConfigError("more than one probe phase", f"elements[{n}].probe")
            probe_index, working_point = n, at
        els.append(e)
    if probe_index is None:
        raise ConfigError("no phase element marked probe=true", "probe_phase")
    try:
        spec = InterferometerSpec(
            mode_count, els, seeds, probe_index, working_point, extras.get("detector")
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "elements") from None
    return spec, extras


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return _fmt(z.real)
    return f"{_fmt(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt(abs(z.imag))}i"


def serialize_spec(spec: InterferometerSpec) -> str:
    lines = [
        f"modes = {spec.mode_count}",
        "seeds = [" + ", ".join(_fmt_complex(s) for s in spec.seeds) + "]",
    ]
    if spec.detector:
        lines.append(f"detector = {spec.detector}")
    for n, e in enumerate(spec.elements):
        if isinstance(e, TwoModeSqueezer):
            lines.append(f"[element] type=squeezer modes=[{e.i},{e.j}] r={_fmt(e.r)} psi={_fmt(e.psi)}")
        elif isinstance(e, BeamSplitter):
            lines.append(f"[element] type=bs modes=[{e.i},{e.j}] theta={_fmt(e.theta)}")
        elif n == spec.probe_index:
            lines.append(f"[element] type=phase mode={e.mode} probe=true at={_fmt(spec.working_point)}")
        else:
            lines.append(f"[element] type=phase mode={e.mode} phi={_fmt(e.phi)}")
    return "\n".join(lines) + "\n"
