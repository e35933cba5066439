"""Acceptance suite: one criterion per test, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS/FAIL line
and timing for every criterion as it executes.

Two criteria assert identities that the implemented definitions themselves
contradict; they are kept as stated and fail honestly, with the oracle-based
form of the same check passing alongside:

* criterion 2, the (3, 3) brute-force equality: datasets at Hamming
  distance 3 can rotate three records' second feature simultaneously, so
  the distance-limited difference set strictly contains the four-entry
  generator family once both table dimensions exceed 2 (at radius 2, or
  for 2-row tables, equality does hold and is verified here);
* criterion 5, the Gamma(shape 2) law: the hull gauge of the emitted noise
  follows the radial density g^(s-1) exp(-eps g), which for s = 1 is the
  exponential law Gamma(1, eps); Gamma(2, eps) is the law of the radial
  multiplier before thinning by the uniform direction, and the emitted
  noise demonstrably does not follow it.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
import scipy.stats as st

from semidp.cnd import cnd_cdf, cnd_quantile, cnd_sample, make_cnd
from semidp.dataspace import (
    DataspaceSpec,
    OneWayMargins,
    conforming_set,
    invariant_eval,
    semi_adjacent_bound,
    semi_adjacent_parameter,
)
from semidp.harness import ExperimentConfig, run_gaussian_experiment, run_knorm_experiment
from semidp.inference import Margins, nchg_distribution, solve_threshold_m
from semidp.mechanisms import gaussian_noise_samples, knorm_noise_samples
from semidp.rng import NoiseRng, RngSeed
from semidp.sensitivity import (
    brute_force_sensitivity_space,
    cell_count_query,
    contingency_s_semi,
    gauge_norm,
    lp_sensitivity,
    projection_matrix,
    span_basis,
)
from semidp.tradeoff import (
    composition_order_check,
    eval_tradeoff,
    gaussian_dp,
    zcdp_to_approx_dp,
)


@contextmanager
def criterion(num: int, description: str, limit_seconds: float):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < limit_seconds, (
            f"runtime {elapsed:.2f}s exceeds the {limit_seconds:.0f}s limit"
        )
    except BaseException as exc:
        print(f"ACCEPTANCE {num:02d} FAIL [{description}]: {exc}", flush=True)
        raise
    print(f"ACCEPTANCE {num:02d} PASS [{description}] ({elapsed:.2f}s)", flush=True)


def test_acceptance_01_census_accounting():
    with criterion(1, "census zcdp-to-dp accounting", limit_seconds=60.0):
        t0 = time.perf_counter()
        advertised = zcdp_to_approx_dp(2.56, 1e-10)
        effective = zcdp_to_approx_dp(10.24, 1e-10)
        dt = time.perf_counter() - t0
        assert advertised == pytest.approx(17.91528, abs=5e-5)
        assert effective == pytest.approx(40.95057, abs=5e-5)
        assert dt < 1e-3, f"conversion took {dt * 1e3:.3f} ms, limit is 1 ms"


def _positive_compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _positive_compositions(total - first, parts - 1):
            yield (first,) + rest


def _margin_instances(r: int, c: int, n_values):
    for n in n_values:
        for rows in _positive_compositions(n, r):
            for cols in _positive_compositions(n, c):
                yield rows, cols


def _brute_vs_generators(r, c, rows, cols):
    space = DataspaceSpec(n=sum(rows), levels=(r, c))
    inv = OneWayMargins((0, 1))
    t = (rows, cols)
    subset = conforming_set(space, inv, t)
    if len(subset) < 2:
        return None
    radius = semi_adjacent_parameter(space, inv, t)
    brute = brute_force_sensitivity_space(space, subset, cell_count_query(space), radius)
    return set(brute.vectors), set(contingency_s_semi(r, c).vectors), radius


def test_acceptance_02_sensitivity_ground_truth():
    with criterion(2, "margin-preserving sensitivity spaces", limit_seconds=60.0):
        assert set(contingency_s_semi(2, 2).vectors) == {
            (1, -1, -1, 1),
            (-1, 1, 1, -1),
            (0, 0, 0, 0),
        }
        for r in range(2, 6):
            for c in range(2, 6):
                s = contingency_s_semi(r, c)
                assert lp_sensitivity(s, 1) == 4.0
                assert lp_sensitivity(s, 2) == 2.0
                assert lp_sensitivity(s, math.inf) == 1.0

        # degenerate margins (a zero row or column): strict subset expected
        for rows, cols, r, c in [
            ((3, 0), (2, 1), 2, 2),
            ((2, 2, 0), (2, 1, 1), 3, 3),
            ((4, 0), (2, 1, 1), 2, 3),
        ]:
            got = _brute_vs_generators(r, c, rows, cols)
            if got is None:
                continue
            brute, generators, _ = got
            assert brute <= generators, f"degenerate {rows}x{cols} not a subset"

        # non-degenerate margins: the criterion asserts exact equality
        failures = []
        for r, c in ((2, 2), (2, 3), (3, 3)):
            for rows, cols in _margin_instances(r, c, range(max(r, c), 6)):
                got = _brute_vs_generators(r, c, rows, cols)
                if got is None:
                    continue
                brute, generators, radius = got
                assert generators >= brute or r > 2, (
                    f"unreachable: non-generator vectors in a 2-row table {rows}/{cols}"
                )
                if brute != generators:
                    extras = sorted(brute - generators)
                    failures.append((r, c, rows, cols, radius, len(extras), extras[0]))
        assert not failures, (
            f"{len(failures)} non-degenerate instances where the distance-limited "
            f"difference set is not the generator family; first: "
            f"(r,c)={failures[0][0:2]} margins={failures[0][2:4]} radius={failures[0][4]} "
            f"extras={failures[0][5]} e.g. {failures[0][6]} (six-entry three-record "
            f"rotation; equality is impossible for 3x3 tables at radius 3)"
        )


def test_acceptance_03_semi_adjacent_parameter():
    with criterion(3, "worst-case replacement radius", limit_seconds=120.0):
        cube = DataspaceSpec(n=3, levels=(2,))
        inv1 = OneWayMargins((0,))
        assert semi_adjacent_parameter(cube, inv1, ((1, 2),)) == 2
        assert semi_adjacent_parameter(cube, inv1, ((3, 0),)) == 0

        table = DataspaceSpec(n=3, levels=(2, 2))
        inv2 = OneWayMargins((0, 1))
        assert semi_adjacent_parameter(table, inv2, ((2, 1), (2, 1))) == 3

        rng = np.random.default_rng(20250809)
        checked = 0
        while checked < 50:
            p = int(rng.integers(1, 4))
            levels = tuple(int(rng.integers(2, 4)) for _ in range(p))
            n = int(rng.integers(2, 6))
            space = DataspaceSpec(n=n, levels=levels)
            if space.size() > 2_000_000:
                continue
            x = tuple(
                tuple(int(rng.integers(1, l + 1)) for l in levels) for _ in range(n)
            )
            inv = OneWayMargins(tuple(range(p)))
            t = invariant_eval(inv, x, space)
            if len(conforming_set(space, inv, t)) > 3000:
                continue
            assert semi_adjacent_parameter(space, inv, t) <= semi_adjacent_bound(p)
            checked += 1


def test_acceptance_04_projected_gaussian():
    with criterion(4, "projected gaussian mechanism", limit_seconds=30.0):
        space = contingency_s_semi(2, 2)
        mu = 1.0
        n = 100_000
        noise = gaussian_noise_samples(space, mu, NoiseRng(RngSeed(404, 1)), n)

        P = projection_matrix(span_basis(space), 4)
        target = (2.0 / mu) ** 2 * P
        emp = noise.T @ noise / n
        for i in range(4):
            for j in range(4):
                se = math.sqrt((target[i, i] * target[j, j] + target[i, j] ** 2) / n)
                assert abs(emp[i, j] - target[i, j]) <= 5 * se, (i, j)

        offspan = noise - noise @ P
        norms = np.linalg.norm(noise, axis=1)
        assert np.max(np.linalg.norm(offspan, axis=1) / np.maximum(norms, 1e-12)) <= 1e-9

        # adjacent conforming tables differ by the generator; the likelihood
        # ratio statistic is its inner product with the released vector
        v = np.array([1.0, -1.0, -1.0, 1.0])
        q0 = np.array([1.0, 1.0, 1.0, 0.0])
        q1 = q0 + v
        h0 = (q0 + noise) @ v
        h1 = (q1 + gaussian_noise_samples(space, mu, NoiseRng(RngSeed(404, 2)), n)) @ v
        for alpha in (0.05, 0.2, 0.5):
            threshold = np.quantile(h0, alpha)
            beta_hat = float(np.mean(h1 <= threshold))
            bound = eval_tradeoff(gaussian_dp(mu), alpha)
            se = math.sqrt(max(bound * (1 - bound), 1e-12) / n)
            assert beta_hat >= bound - 3 * se, (alpha, beta_hat, bound)


def test_acceptance_05_knorm_sampler():
    with criterion(5, "hull-calibrated noise sampler", limit_seconds=30.0):
        space = contingency_s_semi(2, 2)
        eps = 0.7
        n = 100_000
        noise, radii, dirs, _ = knorm_noise_samples(
            space, eps, NoiseRng(RngSeed(505, 1)), n
        )
        direction_gauges = np.array([gauge_norm(space, v) for v in dirs])
        assert direction_gauges.max() <= 1.0 + 1e-9

        gauges = radii * direction_gauges

        # oracle: numeric integration of the radial density g^(s-1) e^(-eps g)
        grid = np.linspace(0.0, 60.0 / eps, 200_001)
        dens = np.exp(-eps * grid)  # s = 1
        cum = np.concatenate(
            [[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))]
        )
        cum /= cum[-1]
        p_oracle = st.kstest(gauges, lambda x: np.interp(x, grid, cum)).pvalue
        assert p_oracle > 0.01, f"gauge law fails its own radial-density oracle: {p_oracle}"

        p_literal = st.kstest(gauges, st.gamma(a=2, scale=1.0 / eps).cdf).pvalue
        p_radius = st.kstest(radii, st.gamma(a=2, scale=1.0 / eps).cdf).pvalue
        assert p_literal > 0.01, (
            f"gauge-of-noise KS vs Gamma(2, eps) p={p_literal:.3g}; the gauge follows "
            f"Gamma(1, eps) (radial-density oracle p={p_oracle:.3f}) while the radial "
            f"multiplier alone is the Gamma(2, eps) quantity (KS p={p_radius:.3f})"
        )


def test_acceptance_06_canonical_noise():
    with criterion(6, "canonical noise distributions", limit_seconds=20.0):
        from semidp.tradeoff import exact_dp

        grid = np.linspace(0.01, 0.99, 99)
        for i, f in enumerate((gaussian_dp(1.0), exact_dp(1.0, 0.0), exact_dp(0.5, 0.01))):
            spec = make_cnd(f)
            lhs = cnd_cdf(spec, np.asarray(cnd_quantile(spec, grid)) - 1.0)
            assert np.max(np.abs(lhs - eval_tradeoff(f, grid))) < 1e-8

            xs = np.linspace(0.05, 6.0, 20)
            sym = np.abs(cnd_cdf(spec, xs) + cnd_cdf(spec, -xs) - 1.0)
            assert np.max(sym) < 1e-10

            draws = cnd_sample(spec, RngSeed(606, i), 100_000)
            assert st.kstest(draws, lambda x: cnd_cdf(spec, x)).pvalue > 0.01


def test_acceptance_07_umpu_test():
    with criterion(7, "private odds-ratio test", limit_seconds=120.0):
        spec = make_cnd(gaussian_dp(1.0))
        f = gaussian_dp(1.0)
        rng = np.random.default_rng(707)
        tested = 0
        while tested < 20:
            n = int(rng.integers(4, 41))
            r1 = int(rng.integers(1, n))
            c1 = int(rng.integers(1, n))
            t = Margins(r1, n - r1, c1, n - c1)
            xs, pmf = nchg_distribution(t, 1.0)
            if len(xs) < 2:
                continue
            alpha = float(rng.uniform(0.01, 0.2))
            m = solve_threshold_m(t, spec, alpha)
            size = float(pmf @ cnd_cdf(spec, xs - m))
            assert abs(size - alpha) < 1e-8

            phis = cnd_cdf(spec, xs - m)
            shifted = 1.0 - eval_tradeoff(f, 1.0 - phis)
            # phi(x) <= 1 - f(1 - phi(x + 1)) and phi(x) <= 1 - f(1 - phi(x - 1))
            assert np.all(phis[:-1] <= shifted[1:] + 1e-12)
            assert np.all(phis[1:] <= shifted[:-1] + 1e-12)
            tested += 1

        # reference configuration: margins (8, 6, 7, 7), x11 = 5, alpha = 0.05.
        # Monte Carlo over 1e5 independent noise draws of the p-value
        # mechanism; per-seed calls are spot-checked against the bulk path.
        t = Margins(8, 6, 7, 7)
        alpha = 0.05
        x11 = 5
        m = solve_threshold_m(t, spec, alpha)
        phi_star = float(cnd_cdf(spec, x11 - m))
        n_mc = 100_000
        noises = cnd_sample(spec, RngSeed(707, 1), n_mc)
        us = x11 + noises
        xs, pmf = nchg_distribution(t, 1.0)
        pvals = cnd_cdf(spec, xs[None, :] - us[:, None]) @ pmf
        frac = float(np.mean(pvals <= alpha))
        se = math.sqrt(phi_star * (1 - phi_star) / n_mc)
        assert abs(frac - phi_star) <= 3 * se, (frac, phi_star)

        from semidp.inference import private_pvalue

        for k in range(50):
            pv = private_pvalue(t.table_for(x11), spec, RngSeed(808, k))
            direct = float(pmf @ cnd_cdf(spec, xs - pv.noisy_statistic))
            assert pv.p_value == pytest.approx(direct, abs=1e-12)


def test_acceptance_08_experiment_reproduction():
    with criterion(8, "noise-cost experiment ordering", limit_seconds=600.0):
        base = 20250809
        stream = 0
        for k in range(2, 11):
            for model in ("I", "II"):
                cfg = ExperimentConfig(
                    k=k, model=model, mu=1.0, replicates=30,
                    seed=RngSeed(base, stream),
                )
                stream += 8
                rows = {r["method"]: r["mean_l2"] for r in run_gaussian_experiment(cfg)}
                assert rows["semi"] < rows["naive"], (k, model, rows)

        for k in (2, 3):
            for model in ("I", "II"):
                for eps in (0.1, 0.5, 1.0):
                    cfg = ExperimentConfig(
                        k=k, model=model, eps=eps, replicates=30,
                        seed=RngSeed(base, stream),
                    )
                    stream += 8
                    rows = {r["method"]: r["mean_l2"] for r in run_knorm_experiment(cfg)}
                    for naive in ("naive_l1", "naive_l2", "naive_linf"):
                        assert rows["knorm"] < rows[naive], (k, model, eps, naive, rows)


def test_acceptance_09_composition_ordering():
    with criterion(9, "composition order of iterated releases", limit_seconds=1.0):
        rng = np.random.default_rng(909)
        for _ in range(10):
            pair = [gaussian_dp(float(rng.uniform(0.1, 3.0))) for _ in range(2)]
            for a in (2, 3):
                report = composition_order_check(pair, a)
                assert report.ordered
                assert abs(report.max_lhs_minus_rhs) <= 1e-12
                assert np.max(
                    np.abs(np.array(report.lhs_values) - np.array(report.rhs_values))
                ) <= 1e-12
