"""Exit criteria for the solver, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import time

import mpmath
import numpy as np
import pytest

from gcblotto import (
    approx_utility,
    asymptote_root,
    build_equilibrium,
    check_thresholds,
    f_k_eval,
    validate_instance,
)
from gcblotto import cli
from gcblotto.config import golden_config
from gcblotto.csvio import read_sweep_csv
from gcblotto.oracle import (
    analytical_gradient,
    finite_diff_gradient,
    grid_best_response,
    hessian_definiteness,
    limit_convergence_check,
    lipschitz_grid_tolerance,
    random_interior_gap,
)

from conftest import ACCEPTANCE_LOG
from corpus import corpus, satisfiable_instance


def record(number, title, ok, detail):
    ACCEPTANCE_LOG.append(
        f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}")
    print(ACCEPTANCE_LOG[-1])
    assert ok, f"criterion {number} failed: {detail}"


@pytest.fixture(scope="module")
def solved_corpus():
    instances = corpus(2024, 50)
    return [(inst, build_equilibrium(inst)) for inst in instances]


def test_01_constant_sum():
    rng = np.random.default_rng(1)
    worst = 0.0
    for inst in corpus(101, 20):
        for _ in range(1000):
            a = rng.dirichlet(np.ones(inst.n)) * inst.resource_a * rng.uniform(0, 1)
            b = rng.dirichlet(np.ones(inst.n)) * inst.resource_b * rng.uniform(0, 1)
            worst = max(worst, abs(approx_utility(a, b, inst)
                                   + approx_utility(b, a, inst) - 1))
    record(1, "constant sum", worst <= 1e-12, f"max |Ua+Ub-1| = {worst:.3g} <= 1e-12")


def test_02_root_quality(solved_corpus):
    worst, bracketed = 0.0, True
    for inst, eq in solved_corpus:
        z_n = eq.gap.gaps[-1]
        worst = max(worst, abs(f_k_eval(z_n, inst) - inst.D))
        zbar = inst.D / (1 + sum(math.sqrt(v / inst.v_min) for v in inst.values[:-1]))
        bracketed &= 0 < z_n < zbar and zbar == pytest.approx(asymptote_root(inst.D, inst))
    record(2, "root quality", worst <= 1e-12 and bracketed,
           f"max |f_k(z_n*)-D| = {worst:.3g} <= 1e-12, 0 < z_n* < zbar: {bracketed}")


def test_03_stationarity(solved_corpus):
    worst = 0.0
    for inst, eq in solved_corpus:
        k, v, z = inst.k, inst.values, eq.gap.gaps
        last = k * v[-1] / (k * k * z[-1] ** 2 + 1)
        worst = max(worst, max(abs(k * v[i] / (k * k * z[i] ** 2 + 1) - last)
                               for i in range(inst.n - 1)))
    record(3, "first-order stationarity", worst <= 1e-8,
           f"max residual = {worst:.3g} <= 1e-8")


def test_04_second_order(solved_corpus):
    definite = sum(hessian_definiteness(eq.gap, inst) for inst, eq in solved_corpus)
    record(4, "negative-definite Hessian", definite == len(solved_corpus),
           f"{definite}/{len(solved_corpus)} instances with all pivots negative")


def test_05_global_max_oracle():
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    worst_excess, worst_deficit, ok = -math.inf, -math.inf, True
    for i in range(10):
        inst = satisfiable_instance(rng, n=(2, 3, 4)[i % 3])
        eq = build_equilibrium(inst)
        step = inst.resource_a / 200
        _, grid_u = grid_best_response(eq.alloc_b, inst, step)
        bound = lipschitz_grid_tolerance(inst, step)
        worst_excess = max(worst_excess, grid_u - eq.value_a)
        worst_deficit = max(worst_deficit, eq.value_a - grid_u)
        ok &= grid_u - eq.value_a <= bound and eq.value_a - grid_u <= bound
    elapsed = time.perf_counter() - start
    record(5, "grid best-response oracle", ok and elapsed <= 20,
           f"max(grid - V^a) = {worst_excess:.3g}, max(V^a - grid) = "
           f"{worst_deficit:.3g}, within Lipschitz bound; {elapsed:.1f}s <= 20s")


def test_06_equal_values_closed_form():
    ok, worst = True, 0.0
    for n, ra, rb, k in [(2, 3, 2, 50), (4, 5, 4, 100), (7, 9, 8, 30), (10, 15, 10, 50)]:
        inst = validate_instance({"values": [1 / n] * n, "resource_a": ra,
                                  "resource_b": rb, "k": k})
        eq = build_equilibrium(inst)
        ok &= all(z == inst.D / n for z in eq.gap.gaps)
        expected = 0.5 + math.atan(k * inst.D / n) / math.pi
        worst = max(worst, abs(eq.value_a - expected))
    record(6, "equal-values closed form", ok and worst <= 1e-14,
           f"z_i* == D/n exactly: {ok}; max |V^a - closed form| = {worst:.3g} <= 1e-14")


def test_07_winner_and_family(solved_corpus):
    rng = np.random.default_rng(7)
    winner = all(eq.value_a > 0.5 for _, eq in solved_corpus)
    spread = 0.0
    for inst, eq in solved_corpus[:10]:
        for _ in range(20):
            base = rng.dirichlet(np.ones(inst.n)) * inst.resource_b
            alt = build_equilibrium(inst, base_b=base)
            spread = max(spread, abs(alt.value_a - eq.value_a))
    record(7, "winner's advantage and equilibrium family", winner and spread <= 1e-12,
           f"V^a > 1/2 on all {len(solved_corpus)}: {winner}; "
           f"max change over random r^b = {spread:.3g} <= 1e-12")


def test_08_threshold_formulas():
    inst = golden_config().instance()
    report = check_thresholds(inst)
    mpmath.mp.dps = 30
    independent = float(9 / mpmath.sqrt(mpmath.mpf("0.0215") * 19))
    err = abs(report.term_hessian - independent)
    ok = (err <= 1e-9 and report.satisfied and report.actual_Dk == 250
          and inst.v_min == 0.0215 and inst.n == 10)
    record(8, "threshold formulas", ok,
           f"term_hessian = {report.term_hessian:.12g} (|err| = {err:.2g}); "
           f"Dk = {report.actual_Dk:g} >= {report.required_Dk:.6g}: {report.satisfied}")


def _sweep(tmp_path, name, parameter, start, stop, count):
    config = golden_config()
    text = cli.cfg.format_config(config) + (
        f"sweep_parameter = {parameter}\nsweep_start = {start}\n"
        f"sweep_stop = {stop}\nsweep_count = {count}\n")
    path = tmp_path / f"{name}.cfg"
    path.write_text(text)
    out = tmp_path / f"{name}.csv"
    code = cli.main(["sweep", "--config", str(path), "--out", str(out)])
    return code, out


def test_09_figure_trends(tmp_path):
    code_d, out_d = _sweep(tmp_path, "d", "D", 1, 9, 17)
    rows = read_sweep_csv(out_d.read_text())
    d_ok = (code_d == 0 and len(rows) == 17
            and all(r.threshold_satisfied for r in rows)
            and all(all(y >= x for x, y in zip(a.z_star, b.z_star))
                    and b.value_a >= a.value_a
                    for a, b in zip(rows, rows[1:])))
    code_k, out_k = _sweep(tmp_path, "k", "k", 20, 200, 19)
    krows = read_sweep_csv(out_k.read_text())
    k_ok = (code_k == 0 and all(r.threshold_satisfied for r in krows)
            and all(b.value_a >= a.value_a for a, b in zip(krows, krows[1:])))
    record(9, "figure trends", d_ok and k_ok,
           f"D-sweep [1,9] x17 z_i*, V^a nondecreasing: {d_ok}; "
           f"k-sweep [20,200] at D=5 V^a nondecreasing: {k_ok}")


def test_10_limit_convergence():
    inst = validate_instance({"values": [0.5, 0.3, 0.2], "resource_a": 4,
                              "resource_b": 3, "k": 10})
    ks = [1e2, 1e4, 1e6]
    devs = limit_convergence_check(inst, ks, 0.1)
    bounds = [inst.values[0] / (math.pi * k * 0.1) * 1.1 for k in ks]
    ok = (all(d <= b for d, b in zip(devs, bounds))
          and all(b <= a for a, b in zip(devs, devs[1:])))
    record(10, "k-approximation limit", ok,
           "deviations " + ", ".join(f"{d:.3g}<={b:.3g}" for d, b in zip(devs, bounds))
           + ", nonincreasing")


def test_11_gradient_cross_check():
    rng = np.random.default_rng(11)
    worst = 0.0
    for inst in corpus(111, 20):
        for _ in range(100):
            gap = random_interior_gap(inst, rng)
            a = analytical_gradient(gap, inst)
            f = finite_diff_gradient(gap, inst, 1e-6)
            worst = max(worst, max(abs(x - y) for x, y in zip(a, f)))
    record(11, "gradient cross-check", worst <= 1e-5,
           f"max |analytical - central FD| = {worst:.3g} <= 1e-5")


def test_12_determinism(tmp_path):
    code1, out1 = _sweep(tmp_path, "first", "D", 1, 9, 17)
    code2, out2 = _sweep(tmp_path, "second", "D", 1, 9, 17)
    same = code1 == code2 == 0 and out1.read_bytes() == out2.read_bytes()
    record(12, "sweep determinism", same, f"byte-identical CSV: {same}")
