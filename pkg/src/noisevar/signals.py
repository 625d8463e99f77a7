"""Seeded synthetic scenarios: piecewise signals plus white Gaussian noise.

A scenario is a list of segments tiling ``[0, duration)``, a piecewise
constant noise standard deviation profile and a list of additive
measurement outliers.  :func:`generate` is a pure function of the spec:
the same spec (seed included) always yields bit-identical arrays.

Scenarios round-trip through a flat text format, one ``key = value`` per
line, where ``segment``, ``noise`` and ``outlier`` may repeat::

    sample_rate = 100
    duration = 25
    seed = 7
    segment = constant start=0 end=5 level=10
    segment = step start=5 end=10 from=10 to=14 ramp=0.5
    segment = chirp start=10 end=20 amplitude=2 f_start=0.2 f_peak=3 f_end=0.2 center=14
    noise = 0 0.1
    noise = 10 0.25
    outlier = 22 3.0

An outlier without a magnitude defaults to 20 times the local noise std.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ScenarioError

__all__ = [
    "Constant",
    "Step",
    "Chirp",
    "Segment",
    "Outlier",
    "ScenarioSpec",
    "Scenario",
    "generate",
    "default_section5_spec",
    "parse_scenario",
    "format_scenario",
    "load_scenario",
]

DEFAULT_OUTLIER_FACTOR = 20.0


@dataclass(frozen=True)
class Constant:
    level: float


@dataclass(frozen=True)
class Step:
    """Linear ramp from ``from_`` to ``to`` over ``ramp`` seconds, then hold."""

    from_: float
    to: float
    ramp: float = 0.0


@dataclass(frozen=True)
class Chirp:
    """``center + amplitude * sin(phase)`` with a rise-then-fall frequency.

    The instantaneous frequency moves linearly from ``f_start`` to ``f_peak``
    over the first half of the segment and back down to ``f_end`` over the
    second half.
    """

    amplitude: float
    f_start: float
    f_peak: float
    f_end: float
    center: float


@dataclass(frozen=True)
class Segment:
    kind: Constant | Step | Chirp
    start: float
    end: float


@dataclass(frozen=True)
class Outlier:
    time: float
    magnitude: float | None = None


@dataclass(frozen=True)
class ScenarioSpec:
    sample_rate: float
    duration: float
    segments: tuple[Segment, ...]
    noise_profile: tuple[tuple[float, float], ...]
    outliers: tuple[Outlier, ...] = ()
    seed: int = 0

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    def index(self, t: float) -> int:
        return int(round(t * self.sample_rate))

    def validate(self) -> "ScenarioSpec":
        if not (math.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ScenarioError(f"must be positive, got {self.sample_rate}", "sample_rate")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ScenarioError(f"must be positive, got {self.duration}", "duration")
        if not 0 <= self.seed < 2**64:
            raise ScenarioError("must be a 64-bit unsigned integer", "seed")
        if not self.segments:
            raise ScenarioError("at least one segment is required", "segment")
        edge = 0.0
        nyquist = self.sample_rate / 2.0
        for seg in self.segments:
            if not math.isclose(seg.start, edge, abs_tol=1e-9):
                raise ScenarioError(f"segment starting at {seg.start} s does not continue from {edge} s", "segment")
            if not seg.end > seg.start:
                raise ScenarioError(f"segment [{seg.start}, {seg.end}) is empty", "segment")
            if isinstance(seg.kind, Chirp):
                for name in ("f_start", "f_peak", "f_end"):
                    f = getattr(seg.kind, name)
                    if not 0 < f < nyquist:
                        raise ScenarioError(f"chirp {name}={f} Hz outside (0, {nyquist}) Hz", "segment")
            if isinstance(seg.kind, Step) and seg.kind.ramp < 0:
                raise ScenarioError("step ramp must be non-negative", "segment")
            edge = seg.end
        if not math.isclose(edge, self.duration, abs_tol=1e-9):
            raise ScenarioError(f"segments end at {edge} s, duration is {self.duration} s", "segment")
        if not self.noise_profile or self.noise_profile[0][0] != 0:
            raise ScenarioError("profile must start at t=0", "noise")
        starts = [t for t, _ in self.noise_profile]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ScenarioError("start times must be strictly increasing", "noise")
        if any(not (math.isfinite(s) and s >= 0) for _, s in self.noise_profile):
            raise ScenarioError("standard deviations must be non-negative", "noise")
        for o in self.outliers:
            if not 0 <= self.index(o.time) < self.n_samples:
                raise ScenarioError(f"outlier time {o.time} s outside the scenario", "outlier")
        return self


@dataclass
class Scenario:
    """Generated arrays, one entry per sample."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    r_true: np.ndarray
    spec: ScenarioSpec = field(repr=False, default=None)


def _noise_std(spec: ScenarioSpec, n: int) -> np.ndarray:
    std = np.empty(n)
    starts = [spec.index(t) for t, _ in spec.noise_profile] + [n]
    for (_, s), lo, hi in zip(spec.noise_profile, starts, starts[1:]):
        std[lo:hi] = s
    return std


def _signal(spec: ScenarioSpec, n: int) -> np.ndarray:
    fs = spec.sample_rate
    x = np.empty(n)
    phase = 0.0  # accumulated across every chirp
    for seg in spec.segments:
        lo, hi = spec.index(seg.start), min(spec.index(seg.end), n)
        if hi <= lo:
            continue
        tau = np.arange(hi - lo) / fs
        kind = seg.kind
        if isinstance(kind, Constant):
            x[lo:hi] = kind.level
        elif isinstance(kind, Step):
            if kind.ramp > 0:
                frac = np.clip(tau / kind.ramp, 0.0, 1.0)
            else:
                frac = np.ones_like(tau)
            x[lo:hi] = kind.from_ + (kind.to - kind.from_) * frac
        else:
            half = (seg.end - seg.start) / 2.0
            freq = np.where(
                tau < half,
                kind.f_start + (kind.f_peak - kind.f_start) * tau / half,
                kind.f_peak + (kind.f_end - kind.f_peak) * (tau - half) / half,
            )
            increments = 2.0 * np.pi * freq / fs
            ph = phase + np.concatenate(([0.0], np.cumsum(increments[:-1])))
            phase = ph[-1] + increments[-1]
            x[lo:hi] = kind.center + kind.amplitude * np.sin(ph)
    return x


def generate(spec: ScenarioSpec) -> Scenario:
    """Sample the scenario: true signal, measurement and noise variance."""
    spec.validate()
    n = spec.n_samples
    rng = np.random.default_rng(spec.seed)
    t = np.arange(n) / spec.sample_rate
    x = _signal(spec, n)
    std = _noise_std(spec, n)
    y = x + std * rng.standard_normal(n)
    for o in spec.outliers:
        i = spec.index(o.time)
        y[i] += o.magnitude if o.magnitude is not None else DEFAULT_OUTLIER_FACTOR * std[i]
    return Scenario(t=t, x=x, y=y, r_true=std**2, spec=spec)


def default_section5_spec(seed: int = 20190601) -> ScenarioSpec:
    """Canonical comparison scenario (25 s at 100 Hz).

    Steady until 5 s; an input then raises the level with two abrupt
    excursions (5 s and 7.5 s); oscillation with rising-then-falling
    frequency from 10 s to 20 s; steady afterwards with a measurement
    outlier at 22 s.  Identical to ``scenarios/section5.cfg``.
    """
    segments = (
        Segment(Constant(10.0), 0.0, 5.0),
        Segment(Constant(19.0), 5.0, 5.01),
        Segment(Constant(14.0), 5.01, 7.5),
        Segment(Constant(6.0), 7.5, 7.51),
        Segment(Step(12.0, 13.0, 1.0), 7.51, 10.0),
        Segment(Chirp(2.0, 0.2, 3.0, 0.2, 13.0), 10.0, 20.0),
        Segment(Constant(13.0), 20.0, 25.0),
    )
    return ScenarioSpec(
        sample_rate=100.0,
        duration=25.0,
        segments=segments,
        noise_profile=((0.0, 0.1), (5.0, 0.2), (10.0, 0.25), (20.0, 0.1)),
        outliers=(Outlier(22.0, 3.0),),
        seed=seed,
    ).validate()


# -- text format -------------------------------------------------------------

_KIND_FIELDS = {
    "constant": (Constant, {"level": "level"}),
    "step": (Step, {"from": "from_", "to": "to", "ramp": "ramp"}),
    "chirp": (Chirp, {f.name: f.name for f in fields(Chirp)}),
}


def _number(text: str, key: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ScenarioError(f"not a number: {text!r}", key) from None
    if not math.isfinite(value):
        raise ScenarioError(f"not finite: {text!r}", key)
    return value


def _parse_segment(value: str, lineno: int) -> Segment:
    key = f"segment (line {lineno})"
    tokens = value.split()
    if not tokens or tokens[0] not in _KIND_FIELDS:
        raise ScenarioError(f"kind must be one of {sorted(_KIND_FIELDS)}", key)
    cls, names = _KIND_FIELDS[tokens[0]]
    params = {}
    for tok in tokens[1:]:
        name, sep, raw = tok.partition("=")
        if not sep:
            raise ScenarioError(f"expected name=value, got {tok!r}", key)
        params[name] = _number(raw, f"{key} {name}")
    try:
        start, end = params.pop("start"), params.pop("end")
    except KeyError as exc:
        raise ScenarioError(f"missing {exc.args[0]}", key) from None
    unknown = set(params) - set(names)
    if unknown:
        raise ScenarioError(f"unknown parameters {sorted(unknown)} for {tokens[0]}", key)
    try:
        kind = cls(**{names[n]: v for n, v in params.items()})
    except TypeError:
        raise ScenarioError(f"{tokens[0]} needs {sorted(names)}", key) from None
    return Segment(kind, start, end)


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse the flat ``key = value`` scenario format."""
    scalars: dict[str, float] = {}
    segments, noise, outliers = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise ScenarioError(f"line {lineno}: expected 'key = value'", key)
        if key == "segment":
            segments.append(_parse_segment(value, lineno))
        elif key == "noise":
            parts = value.split()
            if len(parts) != 2:
                raise ScenarioError(f"line {lineno}: expected '<start s> <std>'", key)
            noise.append((_number(parts[0], key), _number(parts[1], key)))
        elif key == "outlier":
            parts = value.split()
            if len(parts) not in (1, 2):
                raise ScenarioError(f"line {lineno}: expected '<time s> [magnitude]'", key)
            mag = _number(parts[1], key) if len(parts) == 2 else None
            outliers.append(Outlier(_number(parts[0], key), mag))
        elif key in ("sample_rate", "duration", "seed"):
            if key in scalars:
                raise ScenarioError(f"line {lineno}: given twice", key)
            scalars[key] = value
        else:
            raise ScenarioError(f"line {lineno}: unknown key", key)
    for key in ("sample_rate", "duration"):
        if key not in scalars:
            raise ScenarioError("missing", key)
    seed = scalars.get("seed", "0")
    try:
        seed = int(seed)
    except ValueError:
        raise ScenarioError(f"not an integer: {seed!r}", "seed") from None
    return ScenarioSpec(
        sample_rate=_number(scalars["sample_rate"], "sample_rate"),
        duration=_number(scalars["duration"], "duration"),
        segments=tuple(segments),
        noise_profile=tuple(noise),
        outliers=tuple(outliers),
        seed=seed,
    ).validate()


def _fmt(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def format_scenario(spec: ScenarioSpec) -> str:
    """Inverse of :func:`parse_scenario`."""
    lines = [
        f"sample_rate = {_fmt(spec.sample_rate)}",
        f"duration = {_fmt(spec.duration)}",
        f"seed = {spec.seed}",
    ]
    for seg in spec.segments:
        name = type(seg.kind).__name__.lower()
        _, names = _KIND_FIELDS[name]
        params = " ".join(f"{n}={_fmt(getattr(seg.kind, attr))}" for n, attr in names.items())
        lines.append(f"segment = {name} start={_fmt(seg.start)} end={_fmt(seg.end)} {params}")
    lines += [f"noise = {_fmt(t)} {_fmt(s)}" for t, s in spec.noise_profile]
    for o in spec.outliers:
        lines.append(f"outlier = {_fmt(o.time)}" + ("" if o.magnitude is None else f" {_fmt(o.magnitude)}"))
    return "\n".join(lines) + "\n"


def load_scenario(path) -> ScenarioSpec:
    return parse_scenario(Path(path).read_text())
