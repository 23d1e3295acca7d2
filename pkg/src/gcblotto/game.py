"""Game data model, instance validation and the two payoff families.

The classical Blotto payoff is a step in the allocation difference; the
k-approximation replaces the step by a scaled arctan so that utilities are
smooth and the game admits pure-strategy equilibria.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionError,
    NormalizationError,
    ResourceBoundError,
    ValidationError,
)

SUM_TOLERANCE = 1e-12
GAP_SUM_TOLERANCE = 1e-9

Player = Literal["a", "b"]


@dataclass(frozen=True)
class GameInstance:
    """A canonical generalized Blotto game.

    ``values`` are sorted non-increasing and player ``a`` holds the larger
    budget. ``permutation[i]`` is the 0-based index, in the caller's original
    ordering, of canonical battlefield ``i``; ``swapped`` records whether the
    caller's players were relabeled.
    """

    n: int
    values: tuple[float, ...]
    resource_a: float
    resource_b: float
    k: float
    permutation: tuple[int, ...] = ()
    swapped: bool = False

    @property
    def D(self) -> float:
        return self.resource_a - self.resource_b

    @property
    def v_min(self) -> float:
        return self.values[-1]

    @property
    def equal_values(self) -> bool:
        """All battlefields valued identically (the closed-form degenerate case)."""
        return self.values[0] == self.values[-1]

    def values_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def to_original_order(self, seq: Sequence[float]) -> list[float]:
        """Scatter a per-battlefield sequence back into the caller's ordering."""
        out = [0.0] * self.n
        for canonical, original in enumerate(self.permutation):
            out[original] = seq[canonical]
        return out

    def with_resources(self, resource_a: float, resource_b: float) -> GameInstance:
        return validate_instance(
            {"values": self.values, "resource_a": resource_a,
             "resource_b": resource_b, "k": self.k,
             "permutation": self.permutation, "swapped": self.swapped})

    def with_k(self, k: float) -> GameInstance:
        return validate_instance(
            {"values": self.values, "resource_a": self.resource_a,
             "resource_b": self.resource_b, "k": k,
             "permutation": self.permutation, "swapped": self.swapped})


@dataclass(frozen=True)
class Allocation:
    """One player's per-battlefield resource vector."""

    amounts: tuple[float, ...]
    owner: Player = "a"

    def __post_init__(self):
        object.__setattr__(self, "amounts", tuple(float(x) for x in self.amounts))
        if self.owner not in ("a", "b"):
            raise ValueError(f"owner must be 'a' or 'b', got {self.owner!r}")
        if any(x < 0 for x in self.amounts):
            raise ValueError("allocation amounts must be nonnegative")

    def __len__(self):
        return len(self.amounts)

    @property
    def total(self) -> float:
        return math.fsum(self.amounts)

    def is_feasible(self, inst: GameInstance, rel_tol: float = 1e-12) -> bool:
        budget = inst.resource_a if self.owner == "a" else inst.resource_b
        return len(self) == inst.n and self.total <= budget * (1 + rel_tol)


@dataclass(frozen=True)
class GapVector:
    """Per-battlefield gaps z_i = r^a_i - r^b_i and their total."""

    gaps: tuple[float, ...]
    total: float = field(default=float("nan"))

    def __post_init__(self):
        gaps = tuple(float(z) for z in self.gaps)
        object.__setattr__(self, "gaps", gaps)
        s = math.fsum(gaps)
        if math.isnan(self.total):
            object.__setattr__(self, "total", s)
        elif abs(s - self.total) > GAP_SUM_TOLERANCE * max(1.0, abs(self.total)):
            raise ValueError(
                f"gaps sum to {s!r} but total is {self.total!r}")

    def __len__(self):
        return len(self.gaps)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.gaps, dtype=float)

    def within_bounds(self, inst: GameInstance) -> bool:
        return all(-inst.resource_b <= z <= inst.resource_a for z in self.gaps)


def _get(raw, key, default=None):
    if isinstance(raw, Mapping):
        return raw.get(key, default)
    return getattr(raw, key, default)


def validate_instance(raw, auto_normalize: bool = False) -> GameInstance:
    """Check every game precondition and return the canonical instance.

    ``raw`` may be a ``GameInstance``, a mapping or any object exposing
    ``values``, ``resource_a``, ``resource_b`` and ``k`` (``n`` optional).
    Values are stably sorted non-increasing and the players are relabeled
    so that ``a`` holds the larger budget. Valuations must sum to 1 unless
    ``auto_normalize`` is set, in which case they are divided by their sum.
    """
    values = _get(raw, "values")
    if values is None:
        raise ValidationError("instance has no values")
    values = [float(v) for v in values]
    n = _get(raw, "n")
    n = len(values) if n is None else int(n)
    if n != len(values):
        raise DimensionError(f"n = {n} but {len(values)} values were given")
    if n < 2:
        raise ValidationError("at least two battlefields are required")
    if any(not math.isfinite(v) or v <= 0 for v in values):
        raise ValidationError("every valuation must be a positive finite number")

    total = math.fsum(values)
    if abs(total - 1.0) > SUM_TOLERANCE:
        if not auto_normalize:
            raise NormalizationError(
                f"valuations sum to {total!r}, expected 1 "
                "(pass auto_normalize to rescale)")
        values = [v / total for v in values]

    k = float(_get(raw, "k"))
    if not math.isfinite(k) or k <= 0:
        raise ValidationError(f"k must be positive, got {k!r}")

    ra = float(_get(raw, "resource_a"))
    rb = float(_get(raw, "resource_b"))
    if ra < 0 or rb < 0 or not (math.isfinite(ra) and math.isfinite(rb)):
        raise ValidationError("resource totals must be finite and nonnegative")

    prior_perm = _get(raw, "permutation") or tuple(range(n))
    prior_swap = bool(_get(raw, "swapped", False))

    swapped = ra < rb
    if swapped:
        ra, rb = rb, ra
    D = ra - rb
    if D <= 0:
        raise ResourceBoundError("resource totals are equal (D = 0)")
    if D >= (n - 1) * rb:
        raise ResourceBoundError(
            f"D = {D!r} must be below (n-1)*R^b = {(n - 1) * rb!r}")

    order = sorted(range(n), key=lambda i: -values[i])
    return GameInstance(
        n=n,
        values=tuple(values[i] for i in order),
        resource_a=ra,
        resource_b=rb,
        k=k,
        permutation=tuple(prior_perm[i] for i in order),
        swapped=swapped != prior_swap,
    )


def _amounts(x) -> np.ndarray:
    return np.asarray(getattr(x, "amounts", x), dtype=float)


def classical_battlefield_payoff(r_own: float, r_opp: float, v: float) -> float:
    if r_own > r_opp:
        return v
    if r_own == r_opp:
        return v / 2
    return 0.0


def classical_utility(own, opp, inst: GameInstance) -> float:
    a, b = _amounts(own), _amounts(opp)
    if len(a) != inst.n or len(b) != inst.n:
        raise DimensionError(
            f"allocations of length {len(a)} and {len(b)} for n = {inst.n}")
    return math.fsum(classical_battlefield_payoff(x, y, v)
                     for x, y, v in zip(a, b, inst.values))


def approx_battlefield_payoff(r_own: float, r_opp: float, v: float, k: float) -> float:
    """k-approximate battlefield payoff, (v/pi)*arctan(k*(r_own - r_opp)) + v/2."""
    return v / math.pi * math.atan(k * (r_own - r_opp)) + v / 2


def approx_utility(own, opp, inst: GameInstance) -> float:
    a, b = _amounts(own), _amounts(opp)
    if len(a) != inst.n or len(b) != inst.n:
        raise DimensionError(
            f"allocations of length {len(a)} and {len(b)} for n = {inst.n}")
    return math.fsum(approx_battlefield_payoff(x, y, v, inst.k)
                     for x, y, v in zip(a, b, inst.values))
