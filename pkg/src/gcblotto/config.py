"""Run configuration: the line-oriented ``key = value`` file format and the
seeded valuation generator."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ParseError, RangeError, ValidationError
from .game import GameInstance, validate_instance

KEYS = (
    "n", "values", "resource_a", "resource_b", "k",
    "sweep_parameter", "sweep_start", "sweep_stop", "sweep_count",
    "seed", "v_n_target", "auto_normalize", "output_path",
)

# the reference 10-battlefield instance used for the figure-style sweeps
GOLDEN_N = 10
GOLDEN_V_N = 0.0215
GOLDEN_SEED = 42
GOLDEN_RESOURCE_B = 10.0
GOLDEN_RESOURCE_A = 15.0
GOLDEN_K = 50.0


@dataclass(frozen=True)
class Sweep:
    parameter: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.parameter not in ("D", "k"):
            raise ValidationError(
                f"sweep_parameter must be D or k, got {self.parameter!r}")
        if not self.start < self.stop:
            raise ValidationError("sweep_start must be below sweep_stop")
        if self.count < 2:
            raise ValidationError("sweep_count must be at least 2")

    def points(self) -> list[float]:
        return np.linspace(self.start, self.stop, self.count).tolist()


@dataclass(frozen=True)
class RunConfig:
    n: int
    values: tuple[float, ...]
    resource_a: Optional[float]
    resource_b: float
    k: float
    sweep: Optional[Sweep] = None
    seed: Optional[int] = None
    v_n_target: Optional[float] = None
    output_path: Optional[str] = None
    auto_normalize: bool = False

    def instance(self) -> GameInstance:
        """The game described by this config (for a D sweep, at sweep_start)."""
        ra = self.resource_a
        if self.sweep is not None and self.sweep.parameter == "D":
            ra = self.resource_b + self.sweep.start
        return validate_instance(
            {"n": self.n, "values": self.values, "resource_a": ra,
             "resource_b": self.resource_b, "k": self.k},
            auto_normalize=self.auto_normalize)

    def instance_at(self, swept: float) -> GameInstance:
        if self.sweep is None:
            return self.instance()
        if self.sweep.parameter == "D":
            return validate_instance(
                {"values": self.values, "resource_a": self.resource_b + swept,
                 "resource_b": self.resource_b, "k": self.k},
                auto_normalize=self.auto_normalize)
        return validate_instance(
            {"values": self.values, "resource_a": self.resource_a,
             "resource_b": self.resource_b, "k": swept},
            auto_normalize=self.auto_normalize)


def generate_random_values(n: int, v_n_target: float, seed: int) -> list[float]:
    """Random valuations summing to 1 whose minimum is exactly ``v_n_target``.

    n-1 uniform draws are scaled into the mass left after reserving
    ``v_n_target`` for every battlefield, then shifted up by ``v_n_target``.
    The result is sorted non-increasing with ``v_n_target`` appended last.
    """
    n = int(n)
    if n < 2:
        raise RangeError("n must be at least 2")
    if not 0 < v_n_target < 1 / n:
        raise RangeError(
            f"v_n_target = {v_n_target!r} must lie in (0, 1/n) = (0, {1 / n!r})")
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, 1.0, n - 1)
    while np.any(u == 0.0):
        u = rng.uniform(0.0, 1.0, n - 1)
    spare = 1.0 - n * v_n_target
    head = sorted((v_n_target + spare * u / u.sum()).tolist(), reverse=True)
    # push the rounding residue onto the largest entry so the sum is 1
    head[0] += 1.0 - math.fsum(head + [v_n_target])
    return head + [v_n_target]


def _parse_value(key: str, raw: str, lineno: int):
    try:
        if key == "values":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if key in ("n", "sweep_count", "seed"):
            value = int(raw)
            if value < 0:
                raise ValueError("must be nonnegative")
            return value
        if key in ("sweep_parameter", "output_path"):
            return raw
        if key == "auto_normalize":
            lowered = raw.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError("expected a boolean")
            return lowered in ("true", "1", "yes")
        return float(raw)
    except ValueError as exc:
        raise ParseError(f"bad value for {key!r}: {raw!r} ({exc})", lineno) from None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a ``key = value`` config document.

    Values may be given explicitly or generated from ``seed`` and
    ``v_n_target``. Unknown or repeated keys are rejected.
    """
    fields: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in fields:
            raise ParseError(f"duplicate key {key!r}", lineno)
        fields[key] = _parse_value(key, raw, lineno)
    return config_from_fields(fields)


def config_from_fields(fields: dict) -> RunConfig:
    sweep = None
    sweep_keys = ("sweep_parameter", "sweep_start", "sweep_stop", "sweep_count")
    present = [k for k in sweep_keys if k in fields]
    if present:
        missing = [k for k in sweep_keys if k not in fields]
        if missing:
            raise ParseError(f"missing key {missing[0]!r} for sweep")
        sweep = Sweep(fields["sweep_parameter"], fields["sweep_start"],
                      fields["sweep_stop"], fields["sweep_count"])

    required = ["resource_b", "k"]
    if sweep is None or sweep.parameter != "D":
        required.insert(0, "resource_a")
    for key in required:
        if key not in fields:
            raise ParseError(f"missing key {key!r}")

    if "values" in fields:
        values = fields["values"]
        n = fields.get("n", len(values))
    else:
        for key in ("n", "seed", "v_n_target"):
            if key not in fields:
                raise ParseError(
                    f"missing key {key!r} (needed to generate values)")
        n = fields["n"]
        values = tuple(generate_random_values(n, fields["v_n_target"],
                                              fields["seed"]))

    config = RunConfig(
        n=n,
        values=tuple(values),
        resource_a=fields.get("resource_a"),
        resource_b=fields["resource_b"],
        k=fields["k"],
        sweep=sweep,
        seed=fields.get("seed"),
        v_n_target=fields.get("v_n_target"),
        output_path=fields.get("output_path"),
        auto_normalize=fields.get("auto_normalize", False),
    )
    config.instance()
    if sweep is not None and sweep.parameter == "D":
        config.instance_at(sweep.stop)
    elif sweep is not None:
        if sweep.start <= 0:
            raise ValidationError("a k sweep must start above 0")
    return config


def golden_config(**overrides) -> RunConfig:
    values = tuple(generate_random_values(GOLDEN_N, GOLDEN_V_N, GOLDEN_SEED))
    config = RunConfig(n=GOLDEN_N, values=values,
                       resource_a=GOLDEN_RESOURCE_A,
                       resource_b=GOLDEN_RESOURCE_B, k=GOLDEN_K,
                       seed=GOLDEN_SEED, v_n_target=GOLDEN_V_N)
    return replace(config, **overrides)


def format_config(config: RunConfig) -> str:
    """Render a config as a document that ``parse_config`` reads back."""
    def real(x):
        return repr(float(x))

    lines = [f"n = {config.n}",
             "values = " + ", ".join(real(v) for v in config.values)]
    if config.resource_a is not None:
        lines.append(f"resource_a = {real(config.resource_a)}")
    lines += [f"resource_b = {real(config.resource_b)}", f"k = {real(config.k)}"]
    if config.sweep is not None:
        s = config.sweep
        lines += [f"sweep_parameter = {s.parameter}",
                  f"sweep_start = {real(s.start)}",
                  f"sweep_stop = {real(s.stop)}",
                  f"sweep_count = {s.count}"]
    if config.seed is not None:
        lines.append(f"seed = {config.seed}")
    if config.v_n_target is not None:
        lines.append(f"v_n_target = {real(config.v_n_target)}")
    if config.auto_normalize:
        lines.append("auto_normalize = true")
    if config.output_path:
        lines.append(f"output_path = {config.output_path}")
    return "\n".join(lines) + "\n"
