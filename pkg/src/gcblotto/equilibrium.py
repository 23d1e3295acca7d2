"""Closed-form pure-strategy equilibrium of the generalized Blotto game.

Player a's best response pins every gap to the gap on the least valuable
battlefield, z_i = sqrt(z_n^2 v_i/v_n + (v_i - v_n)/(k^2 v_n)). The budget
constraint then reduces to the scalar equation f_k(z_n) = D with f_k
strictly convex; the equilibrium uses its positive root.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    BaseAllocationError,
    ConvergenceError,
    NoSolutionError,
    SingularityError,
    ThresholdError,
)
from .game import Allocation, GameInstance, GapVector

# f'(z_min) must vanish to this level for find_f_minimum to succeed
DERIVATIVE_TOLERANCE = 1e-10


class BaseAllocationRule(str, enum.Enum):
    PROPORTIONAL = "proportional-to-values"
    UNIFORM = "uniform"
    USER = "user-supplied"


@dataclass(frozen=True)
class SolverSettings:
    root_tolerance: float = 1e-12
    max_iterations: int = 200
    base_allocation_rule: BaseAllocationRule = BaseAllocationRule.PROPORTIONAL

    def __post_init__(self):
        if not self.root_tolerance > 0:
            raise ValueError("root_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        object.__setattr__(self, "base_allocation_rule",
                           BaseAllocationRule(self.base_allocation_rule))


@dataclass(frozen=True)
class ThresholdReport:
    term_hessian: float
    term_positivity: float
    required_Dk: float
    actual_Dk: float
    satisfied: bool


@dataclass(frozen=True)
class Equilibrium:
    gap: GapVector
    alloc_a: Allocation
    alloc_b: Allocation
    value_a: float
    value_b: float
    root_residual: float
    threshold: ThresholdReport
    equal_values: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False)


def _radicands(z_n: float, inst: GameInstance) -> np.ndarray:
    # (k^2 z^2 v_i + v_i - v_n) / (k^2 v_n), split to stay accurate for large k
    v = inst.values_array()[:-1]
    vn = inst.v_min
    return z_n * z_n * (v / vn) + (v - vn) / (inst.k * inst.k * vn)


def f_k_eval(z_n: float, inst: GameInstance) -> float:
    """z_n plus the sum of the lifted gaps on battlefields 1..n-1."""
    return z_n + math.fsum(np.sqrt(_radicands(z_n, inst)))


def f_k_derivative(z_n: float, inst: GameInstance) -> float:
    roots = np.sqrt(_radicands(z_n, inst))
    if np.any(roots == 0.0):
        raise SingularityError(
            f"f_k'(z_n) is undefined at z_n = {z_n!r}: a valuation ties v_n")
    ratios = inst.values_array()[:-1] / inst.v_min
    return 1.0 + math.fsum(ratios * z_n / roots)


def asymptote_root(D: float, inst: GameInstance) -> float:
    """Root of the right slant asymptote of f_k; a strict upper bound on the
    positive root of f_k(z_n) = D."""
    ratios = inst.values_array()[:-1] / inst.v_min
    return D / (1.0 + math.fsum(np.sqrt(ratios)))


def _bisect(g: Callable[[float], float], lo: float, hi: float, tol: float,
            max_iterations: int, early_stop: bool = True) -> tuple[float, int]:
    """Bisect a sign change of g on [lo, hi], where g(lo) <= 0 < g(hi).

    Stops once |g(mid)| <= tol, or with ``early_stop=False`` only when g
    hits 0 or the bracket collapses to adjacent floats. On collapse returns
    whichever endpoint has the smaller |g| provided it meets tol; otherwise
    raises ConvergenceError.
    """
    stop = tol if early_stop else 0.0
    g_lo = g(lo)
    if abs(g_lo) <= stop:
        return lo, 0
    g_hi = g(hi)
    for it in range(1, max_iterations + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            best, g_best = (lo, g_lo) if abs(g_lo) <= abs(g_hi) else (hi, g_hi)
            if abs(g_best) <= tol:
                return best, it
            raise ConvergenceError(
                f"bracket collapsed at {best!r} with residual {g_best!r} > {tol!r}")
        g_mid = g(mid)
        if abs(g_mid) <= stop:
            return mid, it
        if g_mid > 0:
            hi, g_hi = mid, g_mid
        else:
            lo, g_lo = mid, g_mid
    raise ConvergenceError(
        f"no root within {tol!r} after {max_iterations} iterations")


def find_f_minimum(inst: GameInstance,
                   settings: SolverSettings | None = None) -> tuple[float, float]:
    """Minimizer z_n_min < 0 of f_k and the minimum value D_floor.

    f_k' is strictly increasing with f_k'(0) = 1, so the root of f_k' is
    bracketed by expanding a negative lower bound until f_k' < 0 there and
    then bisected. Equal valuations make f_k piecewise linear with its kink
    at 0; that case returns (0, 0) directly. More generally, any valuation
    tied with v_n contributes |z_n| to f_k and moves the minimum onto the
    kink at 0, so ties return (0, f_k(0)).
    """
    settings = settings or SolverSettings()
    if inst.equal_values:
        return 0.0, 0.0
    if inst.values[-2] == inst.v_min:
        return 0.0, f_k_eval(0.0, inst)

    def fprime(z):
        return f_k_derivative(z, inst)

    lo = -1.0 / inst.k
    for _ in range(settings.max_iterations):
        if fprime(lo) < 0:
            break
        lo *= 2.0
    else:
        raise ConvergenceError("could not bracket the minimizer of f_k")

    hi = lo
    while fprime(hi) < 0:
        hi *= 0.5
    z_min, _ = _bisect(fprime, lo, hi, DERIVATIVE_TOLERANCE,
                       settings.max_iterations, early_stop=False)
    return z_min, f_k_eval(z_min, inst)


def check_thresholds(inst: GameInstance) -> ThresholdReport:
    """Evaluate the two lower bounds on D*k under which the equilibrium holds."""
    n, vn = inst.n, inst.v_min
    v = inst.values_array()[:-1]
    term_hessian = (n - 1) / math.sqrt(vn * (2 * n - 1))
    term_positivity = math.fsum(np.sqrt((v - vn) / vn))
    required = max(term_hessian, term_positivity)
    actual = inst.D * inst.k
    return ThresholdReport(term_hessian, term_positivity, required, actual,
                           actual >= required)


def _require_threshold(inst: GameInstance) -> ThresholdReport:
    report = check_thresholds(inst)
    if not report.satisfied:
        raise ThresholdError(
            f"D*k = {report.actual_Dk:.6g} is below the required "
            f"{report.required_Dk:.6g}", report.required_Dk, report.actual_Dk)
    return report


def solve_gap_root(inst: GameInstance,
                   settings: SolverSettings | None = None) -> float:
    """Positive root of f_k(z_n) = D, by bisection on [0, asymptote_root].

    Bisects to full precision; ``settings.root_tolerance`` bounds the
    residual that is accepted.
    """
    settings = settings or SolverSettings()
    D = inst.D
    if inst.equal_values:
        _require_threshold(inst)
        return D / inst.n

    _, D_floor = find_f_minimum(inst, settings)
    if D < D_floor:
        raise NoSolutionError(
            f"D = {D!r} is below the minimum of f_k, {D_floor!r}")
    _require_threshold(inst)

    hi = asymptote_root(D, inst)
    root, _ = _bisect(lambda z: f_k_eval(z, inst) - D, 0.0, hi,
                      settings.root_tolerance, settings.max_iterations,
                      early_stop=False)
    return root


def lift_gaps(z_n_star: float, inst: GameInstance) -> GapVector:
    """Gap on every battlefield implied by the gap on the last one."""
    z = np.sqrt(_radicands(z_n_star, inst)).tolist()
    z.append(float(z_n_star))
    return GapVector(tuple(z))


def check_gap_feasibility(gap: GapVector, inst: GameInstance) -> bool:
    return len(gap) == inst.n and all(0 < z <= inst.resource_a for z in gap.gaps)


def game_value(gap: GapVector, inst: GameInstance) -> tuple[float, float]:
    """Equilibrium utilities (V^a, V^b) for a feasible gap vector."""
    terms = [v / math.pi * math.atan(inst.k * z)
             for v, z in zip(inst.values, gap.gaps)]
    value_a = 0.5 + math.fsum(terms)
    return value_a, 1.0 - value_a


def default_base_allocation(inst: GameInstance,
                            rule: BaseAllocationRule) -> Allocation:
    if rule is BaseAllocationRule.PROPORTIONAL:
        amounts = [v * inst.resource_b for v in inst.values]
    elif rule is BaseAllocationRule.UNIFORM:
        amounts = [inst.resource_b / inst.n] * inst.n
    else:
        raise BaseAllocationError(
            "base_allocation_rule is user-supplied but no base_b was given")
    return Allocation(tuple(amounts), owner="b")


def _check_base(base_b, inst: GameInstance) -> Allocation:
    amounts = tuple(float(x) for x in getattr(base_b, "amounts", base_b))
    if len(amounts) != inst.n:
        raise BaseAllocationError(
            f"base allocation has {len(amounts)} entries, expected {inst.n}")
    if any(not math.isfinite(x) or x < 0 for x in amounts):
        raise BaseAllocationError("base allocation entries must be nonnegative")
    total = math.fsum(amounts)
    if abs(total - inst.resource_b) > 1e-9 * max(1.0, inst.resource_b):
        raise BaseAllocationError(
            f"base allocation spends {total!r}, expected R^b = {inst.resource_b!r}")
    return Allocation(amounts, owner="b")


def build_equilibrium(inst: GameInstance,
                      settings: SolverSettings | None = None,
                      base_b=None) -> Equilibrium:
    """Solve the game and assemble one member of the equilibrium family.

    Player b may play any full-budget allocation; ``base_b`` picks it,
    otherwise ``settings.base_allocation_rule`` does. Player a plays
    b's allocation plus the equilibrium gaps. The game value does not
    depend on the choice of ``base_b``.
    """
    settings = settings or SolverSettings()
    if base_b is not None:
        alloc_b = _check_base(base_b, inst)
    else:
        alloc_b = default_base_allocation(inst, settings.base_allocation_rule)

    threshold = _require_threshold(inst)
    z_n = solve_gap_root(inst, settings)
    gap = lift_gaps(z_n, inst)
    if inst.equal_values:
        # every radical collapses to |z_n|; keep the exact closed form
        gap = GapVector((z_n,) * inst.n)
    residual = abs(f_k_eval(z_n, inst) - inst.D)
    alloc_a = Allocation(tuple(b + z for b, z in zip(alloc_b.amounts, gap.gaps)),
                         owner="a")
    value_a, value_b = game_value(gap, inst)
    return Equilibrium(
        gap=gap,
        alloc_a=alloc_a,
        alloc_b=alloc_b,
        value_a=value_a,
        value_b=value_b,
        root_residual=residual,
        threshold=threshold,
        equal_values=inst.equal_values,
        diagnostics={"feasible": check_gap_feasibility(gap, inst),
                     "swapped": inst.swapped},
    )
