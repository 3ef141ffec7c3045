"""Flat ``key=value`` run configuration.

One key per line, ``#`` starts a comment, blank lines are ignored.  Grids are
comma-separated items, each either a number or an inclusive range
``start:stop:step``::

    kind = sweep_tau
    grid = 2:30:2, 32, 64, 128
    t_heat = 100
    gamma = 0.085
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

from .engine import IrreversibilityReference, MeasurementPolicy, StrokeTimes
from .model import EngineParams


class ConfigError(ValueError):
    """Malformed configuration or an invariant violated by its values."""


class SweepKind(enum.Enum):
    SINGLE_CYCLE = "single"
    SWEEP_T1 = "sweep_t1"
    SWEEP_TAU = "sweep_tau"
    MULTI_CYCLE = "multicycle"


PARAM_KEYS = tuple(f.name for f in dataclasses.fields(EngineParams))
RUN_KEYS = ("kind", "grid", "cycles", "t_heat", "tau", "policy", "step_size", "ir_reference", "output")
KNOWN_KEYS = RUN_KEYS + PARAM_KEYS

DEFAULT_GRIDS = {
    SweepKind.SWEEP_T1: "5:100:5",
    SweepKind.SWEEP_TAU: "4, 8, 16, 32, 64, 128, 256",
}


def default_times(kind):
    if kind is SweepKind.MULTI_CYCLE:
        return StrokeTimes(t_heat=25.0, tau=11.0)
    return StrokeTimes(t_heat=100.0, tau=256.0)


def default_policy(kind):
    if kind is SweepKind.MULTI_CYCLE:
        return MeasurementPolicy.FEEDBACK_PI_PULSE
    return MeasurementPolicy.POST_SELECT_GROUND


@dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind = SweepKind.SINGLE_CYCLE
    grid: tuple = ()
    cycles: int = 20
    params: EngineParams = field(default_factory=EngineParams)
    times: StrokeTimes = field(default_factory=lambda: default_times(SweepKind.SINGLE_CYCLE))
    policy: MeasurementPolicy = MeasurementPolicy.POST_SELECT_GROUND
    step_size: float = 1e-3
    reference: IrreversibilityReference = IrreversibilityReference.STEADY
    output_path: str = ""

    def default_output(self):
        return self.output_path or f"{self.kind.value}.csv"


def parse_grid(text):
    """Expand ``"10:100:5, 120"`` into a tuple of floats."""
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range '{item}' must be start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if not step > 0:
                raise ConfigError(f"range step must be > 0 in '{item}'")
            n = math.floor((stop - start) / step + 1e-9)
            if n < 0:
                raise ConfigError(f"empty range '{item}'")
            # integer multiples avoid accumulating the step
            values.extend(start + i * step for i in range(n + 1))
        else:
            values.append(float(item))
    return tuple(values)


def _parse_lines(text):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got '{raw.strip()}'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        entries[key] = (lineno, value)
    return entries


def parse_config(text):
    """Build a :class:`SweepSpec` from configuration text."""
    entries = _parse_lines(text)

    def get(key, convert, default):
        if key not in entries:
            return default
        lineno, value = entries[key]
        try:
            return convert(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {exc}") from None

    kind = get("kind", lambda v: SweepKind(v.replace("-", "_").lower()), SweepKind.SINGLE_CYCLE)
    param_values = {k: get(k, float, None) for k in PARAM_KEYS}
    param_values = {k: v for k, v in param_values.items() if v is not None}
    base = EngineParams()
    merged = {**dataclasses.asdict(base), **param_values}
    validate_param_values(merged)
    params = EngineParams(**merged)

    times0 = default_times(kind)
    t_heat = get("t_heat", float, times0.t_heat)
    tau = get("tau", float, times0.tau)
    for name, val in (("t_heat", t_heat), ("tau", tau)):
        if not val > 0:
            raise ConfigError(f"{name} must be > 0, got {val}")

    grid_text = get("grid", str, DEFAULT_GRIDS.get(kind, ""))
    grid = parse_grid(grid_text) if grid_text else ()
    cycles = get("cycles", int, 20)
    step_size = get("step_size", float, 1e-3)
    if not step_size > 0:
        raise ConfigError(f"step_size must be > 0, got {step_size}")
    spec = SweepSpec(
        kind=kind,
        grid=grid,
        cycles=cycles,
        params=params,
        times=StrokeTimes(t_heat, tau),
        policy=get("policy", MeasurementPolicy, default_policy(kind)),
        step_size=step_size,
        reference=get("ir_reference", IrreversibilityReference, IrreversibilityReference.STEADY),
        output_path=get("output", str, ""),
    )
    validate_spec(spec)
    return spec


def load_config(path):
    """Read and validate a configuration file."""
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def validate_param_values(values):
    """Check engine parameters before construction; stricter than :class:`EngineParams`."""
    if not values["B_low"] < values["B_high"]:
        raise ConfigError(f"B_low < B_high violated: B_low={values['B_low']}, B_high={values['B_high']}")
    for name in ("g", "k", "omega", "gamma", "T_hot", "n_cold"):
        if not values[name] > 0:
            raise ConfigError(f"{name} must be > 0, got {values[name]}")
    for name in ("n_th", "n_vib0"):
        if values[name] < 0:
            raise ConfigError(f"{name} must be >= 0, got {values[name]}")


def validate_spec(spec):
    if spec.kind in (SweepKind.SWEEP_T1, SweepKind.SWEEP_TAU):
        if not spec.grid:
            raise ConfigError("grid must be nonempty for a sweep")
        if any(b <= a for a, b in zip(spec.grid, spec.grid[1:])):
            raise ConfigError("grid must be strictly increasing")
        if spec.grid[0] <= 0:
            raise ConfigError("grid values must be > 0")
    if spec.cycles < 1:
        raise ConfigError(f"cycles must be >= 1, got {spec.cycles}")


def write_config(spec):
    """Serialise a spec so that ``parse_config(write_config(s)) == s``."""
    lines = [
        f"kind = {spec.kind.value}",
        f"grid = {', '.join(repr(float(x)) for x in spec.grid)}" if spec.grid else None,
        f"cycles = {spec.cycles}",
        f"t_heat = {spec.times.t_heat!r}",
        f"tau = {spec.times.tau!r}",
        f"policy = {spec.policy.value}",
        f"step_size = {spec.step_size!r}",
        f"ir_reference = {spec.reference.value}",
        f"output = {spec.output_path}" if spec.output_path else None,
    ]
    lines += [f"{name} = {getattr(spec.params, name)!r}" for name in PARAM_KEYS]
    return "\n".join(line for line in lines if line is not None) + "\n"
