"""Independent certification of solver output.

Three checks that do not reuse the solver's closed forms: exhaustive best
response on a lattice over player a's budget simplex, central finite
differences of the reduced utility, and the sign of the elimination pivots
of the reduced Hessian.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import GridError, GridTooLargeError, StationarityError
from .game import (
    Allocation,
    GameInstance,
    GapVector,
    approx_battlefield_payoff,
    approx_utility,
    classical_battlefield_payoff,
)

MAX_GRID_SIZE = 10**7
MAX_GRID_BATTLEFIELDS = 5
STATIONARITY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class VerificationReport:
    grid_best_utility: float
    solver_utility: float
    grid_gap: float
    max_gradient_residual: float
    hessian_negative_definite: bool
    grid_step: float
    samples_checked: int
    grid_tolerance: float = float("nan")
    gradient_agreement: float = float("nan")

    @property
    def passed(self) -> bool:
        return (self.grid_gap <= self.grid_tolerance
                and self.grid_gap >= -self.grid_tolerance
                and self.max_gradient_residual <= 1e-8
                and self.gradient_agreement <= 1e-5
                and self.hessian_negative_definite)


def grid_units(total: float, step: float) -> int:
    """Number of whole steps in ``total``; raises GridError if not integral."""
    if not step > 0:
        raise GridError(f"step must be positive, got {step!r}")
    ratio = total / step
    m = round(ratio)
    if abs(ratio - m) > 1e-9 * max(1.0, ratio):
        raise GridError(f"total {total!r} is not a multiple of step {step!r}")
    return int(m)


def grid_size(m: int, n: int) -> int:
    return math.comb(m + n - 1, n - 1)


def simplex_compositions(m: int, n: int) -> Iterator[tuple[int, ...]]:
    """Compositions of m into n nonnegative parts, lexicographically ascending."""
    # stars and bars: ascending bar positions give ascending compositions
    for bars in itertools.combinations(range(m + n - 1), n - 1):
        parts = []
        prev = -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(m + n - 2 - prev)
        yield tuple(parts)


def enumerate_simplex_grid(total: float, n: int, step: float,
                           owner: str = "a") -> Iterator[Allocation]:
    """Every full-budget allocation whose entries are multiples of ``step``.

    Entries are carried as integer step counts and scaled by total/m only
    on output, so each composition sums to exactly m units.
    """
    m = grid_units(total, step)
    unit = total / m if m else 0.0
    for parts in simplex_compositions(m, n):
        yield Allocation(tuple(p * unit for p in parts), owner=owner)


@functools.lru_cache(maxsize=1024)
def _composition_array(m: int, n: int) -> np.ndarray:
    if n == 1:
        return np.array([[m]], dtype=np.int64)
    if n == 2:
        first = np.arange(m + 1, dtype=np.int64)
        out = np.column_stack([first, m - first])
        out.flags.writeable = False
        return out
    blocks = []
    for first in range(m + 1):
        rest = _composition_array(m - first, n - 1)
        blocks.append(np.column_stack(
            [np.full(len(rest), first, dtype=np.int64), rest]))
    out = np.vstack(blocks)
    out.flags.writeable = False  # shared through the cache
    return out


def _composition_chunks(m: int, n: int) -> Iterator[np.ndarray]:
    # one chunk per value of the first coordinate keeps memory at C(m+n-2, n-2)
    if n <= 2:
        yield _composition_array(m, n)
        return
    for first in range(m + 1):
        rest = _composition_array(m - first, n - 1)
        yield np.column_stack([np.full(len(rest), first, dtype=np.int64), rest])


def grid_best_response(opp, inst: GameInstance,
                       step: float) -> tuple[Allocation, float]:
    """Exhaustive best response of player a against a fixed ``opp``.

    Maximizes the k-approximate utility over the full-budget lattice with
    spacing ``step``. Ties go to the lexicographically first grid point.
    """
    n = inst.n
    m = grid_units(inst.resource_a, step)
    size = grid_size(m, n)
    if n > MAX_GRID_BATTLEFIELDS or size > MAX_GRID_SIZE:
        raise GridTooLargeError(
            f"grid has {size} points for n = {n}; use a larger step "
            f"or n <= {MAX_GRID_BATTLEFIELDS}", size)

    opp = np.asarray(getattr(opp, "amounts", opp), dtype=float)
    v = inst.values_array()
    unit = inst.resource_a / m
    best_parts, best_u = None, -math.inf
    for chunk in _composition_chunks(m, n):
        r = chunk * unit
        u = (np.arctan(inst.k * (r - opp)) * (v / math.pi)).sum(axis=1)
        i = int(np.argmax(u))
        if u[i] > best_u:
            best_u, best_parts = float(u[i]), chunk[i]
    best = Allocation(tuple(float(p) * unit for p in best_parts), owner="a")
    return best, approx_utility(best, opp, inst)


def reduced_utility(free: Sequence[float], total: float,
                    inst: GameInstance) -> float:
    """Player a's utility as a function of z_1..z_{n-1}, with z_n = total - sum."""
    free = list(free)
    z_n = total - math.fsum(free)
    return 0.5 + math.fsum(
        v / math.pi * math.atan(inst.k * z)
        for v, z in zip(inst.values, free + [z_n]))


def analytical_gradient(gap: GapVector, inst: GameInstance) -> list[float]:
    """Gradient of the reduced utility in the n-1 free gap coordinates.

    Uses the stored last gap as z_n; GapVector guarantees it equals
    total - sum(free) to within rounding.
    """
    k, vn = inst.k, inst.v_min
    free = gap.gaps[:-1]
    z_n = gap.gaps[-1]
    last = k * vn / (k * k * z_n * z_n + 1)
    return [(k * v / (k * k * z * z + 1) - last) / math.pi
            for v, z in zip(inst.values[:-1], free)]


def central_difference(func: Callable[[np.ndarray], float],
                       x: Sequence[float], h: float) -> list[float]:
    if not h > 0:
        raise ValueError("h must be positive")
    x0 = np.asarray(x, dtype=float)
    grad = []
    for j in range(len(x0)):
        xp, xm = x0.copy(), x0.copy()
        xp[j] += h
        xm[j] -= h
        grad.append((func(xp) - func(xm)) / (2 * h))
    return grad


def finite_diff_gradient(gap: GapVector, inst: GameInstance,
                         h: float = 1e-6) -> list[float]:
    return central_difference(
        lambda free: reduced_utility(free, gap.total, inst), gap.gaps[:-1], h)


def reduced_hessian(gap: GapVector, inst: GameInstance) -> np.ndarray:
    """Closed-form Hessian of the reduced utility at ``gap``."""
    k, vn = inst.k, inst.v_min
    z = gap.as_array()
    z_n = z[-1]
    c = 2 * k**3 / math.pi
    shared = -c * vn * z_n / (k * k * z_n * z_n + 1) ** 2
    own = -c * inst.values_array()[:-1] * z[:-1] / (k * k * z[:-1] ** 2 + 1) ** 2
    H = np.full((inst.n - 1, inst.n - 1), shared)
    H[np.diag_indices_from(H)] += own
    return H


def elimination_pivots(H: np.ndarray) -> list[float]:
    """Pivots of Gaussian elimination without row exchanges.

    Stops early (returning the pivots so far) at a zero pivot.
    """
    A = np.array(H, dtype=float)
    pivots = []
    for j in range(len(A)):
        p = A[j, j]
        pivots.append(float(p))
        if p == 0:
            break
        A[j + 1:, j:] -= np.outer(A[j + 1:, j] / p, A[j, j:])
    return pivots


def hessian_definiteness(gap: GapVector, inst: GameInstance,
                         tol: float = STATIONARITY_TOLERANCE) -> bool:
    """True iff the reduced Hessian at a stationary ``gap`` is negative definite."""
    residual = max((abs(g) for g in analytical_gradient(gap, inst)), default=0.0)
    if residual > tol:
        raise StationarityError(
            f"gradient residual {residual!r} exceeds {tol!r}; not a stationary point")
    pivots = elimination_pivots(reduced_hessian(gap, inst))
    return len(pivots) == inst.n - 1 and all(p < 0 for p in pivots)


def finite_diff_hessian(gap: GapVector, inst: GameInstance,
                        h: float = 1e-4) -> np.ndarray:
    """Second-difference Hessian of the reduced utility; a slow cross-check."""
    x0 = np.asarray(gap.gaps[:-1], dtype=float)
    m = len(x0)
    H = np.empty((m, m))
    f = lambda x: reduced_utility(x, gap.total, inst)  # noqa: E731
    for i in range(m):
        for j in range(m):
            ei, ej = np.eye(m)[i] * h, np.eye(m)[j] * h
            H[i, j] = (f(x0 + ei + ej) - f(x0 + ei - ej)
                       - f(x0 - ei + ej) + f(x0 - ei - ej)) / (4 * h * h)
    return H


def lemma_bound(v: float, k: float, delta: float) -> float:
    """Upper bound on |approx - classical| for gaps of size at least delta."""
    return v / (math.pi * k * delta)


def limit_convergence_check(inst: GameInstance, k_sequence: Sequence[float],
                            delta: float, samples: int = 2000,
                            seed: int = 0) -> list[float]:
    """Worst |approx - classical| battlefield payoff per k, over |gap| >= delta.

    The same sample set is reused for every k and always contains gaps of
    exactly +-delta on the most valuable battlefield, where the deviation
    peaks.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    rng = np.random.default_rng(seed)
    v_max = inst.values[0]
    triples = [(delta, 0.0, v_max), (0.0, delta, v_max)]
    for _ in range(samples):
        z = (delta + rng.exponential(inst.resource_b)) * rng.choice([-1.0, 1.0])
        r_opp = rng.uniform(0.0, inst.resource_b)
        r_own = r_opp + z
        if r_own < 0:
            r_own, r_opp = r_opp, r_opp - z
        triples.append((r_own, r_opp, float(rng.choice(inst.values))))

    deviations = []
    for k in k_sequence:
        worst = max(abs(approx_battlefield_payoff(a, b, v, k)
                        - classical_battlefield_payoff(a, b, v))
                    for a, b, v in triples)
        deviations.append(worst)
    return deviations


def lipschitz_grid_tolerance(inst: GameInstance, step: float) -> float:
    """Utility change bound for moving each coordinate by at most ``step``."""
    return math.fsum(inst.values) * inst.k / math.pi * step


def verify_equilibrium(inst: GameInstance, eq, step: float, *,
                       gap: GapVector | None = None, h: float = 1e-6,
                       gradient_samples: int = 100,
                       seed: int = 0) -> VerificationReport:
    """Run the grid, gradient and Hessian checks against a solved equilibrium.

    ``gap`` overrides the point at which stationarity and definiteness are
    tested (defaults to the equilibrium gap).
    """
    gap = eq.gap if gap is None else gap
    _, grid_u = grid_best_response(eq.alloc_b, inst, step)

    stationarity = max((abs(g) for g in analytical_gradient(gap, inst)),
                       default=0.0)
    try:
        definite = hessian_definiteness(gap, inst)
    except StationarityError:
        definite = False

    rng = np.random.default_rng(seed)
    agreement = 0.0
    for _ in range(gradient_samples):
        point = random_interior_gap(inst, rng)
        a = analytical_gradient(point, inst)
        f = finite_diff_gradient(point, inst, h)
        agreement = max(agreement, max(abs(x - y) for x, y in zip(a, f)))

    return VerificationReport(
        grid_best_utility=grid_u,
        solver_utility=eq.value_a,
        grid_gap=grid_u - eq.value_a,
        max_gradient_residual=stationarity,
        hessian_negative_definite=definite,
        grid_step=step,
        samples_checked=grid_size(grid_units(inst.resource_a, step), inst.n),
        grid_tolerance=lipschitz_grid_tolerance(inst, step),
        gradient_agreement=agreement,
    )


def random_interior_gap(inst: GameInstance, rng: np.random.Generator) -> GapVector:
    """A random gap vector summing to D with every entry inside (-R^b, R^a).

    Half the draws concentrate within a few 1/k of zero, where the arctan
    payoff bends hardest.
    """
    narrow = rng.random() < 0.5
    while True:
        if narrow:
            free = rng.normal(0.0, 2.0 / inst.k, inst.n - 1)
        else:
            free = rng.uniform(-inst.resource_b, inst.resource_a, inst.n - 1)
        z_n = inst.D - free.sum()
        if -inst.resource_b < z_n < inst.resource_a:
            return GapVector(tuple(free) + (z_n,), inst.D)
