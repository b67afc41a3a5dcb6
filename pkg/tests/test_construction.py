"""Weight schedules, combinatorial utilities, and the CBC search."""
import itertools
import math

import numpy as np
import pytest
from scipy.special import zeta as scipy_zeta

from mlqmc.construction import (CBCResult, ProductWeights, WeightSchedule,
                                cbc_construct, cbc_construct_embedded,
                                coordinate_rho, euler_totient,
                                fubini_bound_holds, fubini_number,
                                lambda_from_summability, pod_weight,
                                variance_bound, zeta_direct)
from oracles import (cbc_error_direct, cbc_greedy_exhaustive, fubini_stirling,
                     totient_bruteforce)

# frozen from the classical series value of zeta(3/2)
ZETA_3_2 = 2.612375348685488


# ---------------------------------------------------------------- fubini

def test_fubini_first_values():
    assert [fubini_number(n) for n in range(6)] == [1, 1, 3, 13, 75, 541]


def test_fubini_matches_stirling_oracle():
    for n in range(9):
        assert fubini_number(n) == fubini_stirling(n)


def test_fubini_negative_rejected():
    with pytest.raises(ValueError):
        fubini_number(-1)


def test_fubini_bound_examples():
    assert fubini_bound_holds(3, math.log(2.0))
    assert fubini_bound_holds(0, 0.3)
    assert all(fubini_bound_holds(n, math.log(2.0)) for n in range(13))


def test_fubini_bound_sharpness():
    # the bound needs alpha <= ln 2; well above it the inequality breaks
    assert not fubini_bound_holds(12, 1.0)


# ---------------------------------------------------------------- totient

def test_totient_examples():
    assert euler_totient(7) == 6
    assert euler_totient(8) == 4
    assert euler_totient(12) == 4


def test_totient_matches_gcd_count():
    for n in range(2, 200):
        assert euler_totient(n) == totient_bruteforce(n)


def test_totient_domain():
    with pytest.raises(ValueError):
        euler_totient(1)


# ---------------------------------------------------------------- zeta and rho

def test_zeta_against_frozen_and_scipy():
    assert zeta_direct(1.5) == pytest.approx(ZETA_3_2, abs=1e-12)
    assert zeta_direct(2.0) == pytest.approx(math.pi ** 2 / 6.0, abs=1e-12)
    for x in (1.51, 1.75, 2.5):
        assert zeta_direct(x) == pytest.approx(float(scipy_zeta(x)), abs=1e-12)


def test_zeta_domain():
    with pytest.raises(ValueError):
        zeta_direct(1.0)


def test_rho_eta_values():
    # eta = (2 lam - 1) / (4 lam) enters only through the formula; check it
    # via a direct in-test recomputation at lam = 1 and 3/4
    for lam, eta in ((1.0, 0.25), (0.75, 1.0 / 6.0)):
        alpha = 0.7
        inner = (math.sqrt(2.0 * math.pi) * math.exp(alpha ** 2 / eta)
                 / (math.pi ** (2.0 - 2.0 * eta) * (1.0 - eta) * eta))
        want = 2.0 * inner ** lam * zeta_direct(lam + 0.5)
        assert coordinate_rho(alpha, lam) == pytest.approx(want, rel=1e-12)


def test_rho_reference_value():
    # alpha=1, lambda=1: 2 * (sqrt(2 pi) e^4 / (pi^1.5 * 0.75 * 0.25)) * zeta(1.5)
    inner = math.sqrt(2.0 * math.pi) * math.exp(4.0) / (math.pi ** 1.5 * 0.1875)
    want = 2.0 * inner * ZETA_3_2
    got = coordinate_rho(1.0, 1.0)
    assert got == pytest.approx(want, rel=1e-10)
    assert got == pytest.approx(6.85e2, rel=2e-3)


def test_rho_monotone_in_alpha():
    vals = [coordinate_rho(a, 0.8) for a in (0.5, 1.0, 2.0, 4.0)]
    assert all(x < y for x, y in zip(vals, vals[1:]))


def test_rho_domain():
    with pytest.raises(ValueError):
        coordinate_rho(1.0, 0.5)
    with pytest.raises(ValueError):
        coordinate_rho(0.0, 0.8)


def test_rho_huge_alpha_returns_inf():
    assert coordinate_rho(40.0, 1.0) == math.inf


# ---------------------------------------------------------------- lambda map

def test_lambda_from_summability():
    assert lambda_from_summability(0.5, 0.1) == pytest.approx(1.0 / 1.8)
    assert lambda_from_summability(0.8) == pytest.approx(2.0 / 3.0)
    assert lambda_from_summability(1.0 - 1e-9) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        lambda_from_summability(2.0 / 3.0)
    with pytest.raises(ValueError):
        lambda_from_summability(0.5, 0.7)


# ---------------------------------------------------------------- weights

def make_schedule(lam=0.75, s=6, b0=0.05):
    b_bar = b0 * (np.arange(1, s + 1) ** -2.0)
    return WeightSchedule.from_b_bar(b_bar, lam=lam)


def test_schedule_validation():
    b = np.asarray([0.1, 0.05])
    with pytest.raises(ValueError):
        WeightSchedule(lam=0.5, alpha=11 * b + 0.1, b_bar=b, j_bar=0.1,
                       rho_max=10.0)
    with pytest.raises(ValueError):
        # alpha_j > 11 b_bar_j violated
        WeightSchedule(lam=0.8, alpha=10.0 * b, b_bar=b, j_bar=0.1,
                       rho_max=10.0)


def test_pod_weight_empty_set():
    assert pod_weight((), make_schedule()) == 1.0


def test_pod_weight_singleton_formula():
    # gamma_{j} = ( ((1+5)!)^2 * 4 bbar_j^2 / (jbar * rho_max) )^(1/(1+lam))
    sched = make_schedule(lam=0.75)
    for j in (1, 3):
        bj = sched.b_bar[j - 1]
        inner = (math.factorial(6) ** 2 * 4.0 * bj ** 2
                 / (sched.j_bar * sched.rho_max))
        want = inner ** (1.0 / 1.75)
        assert pod_weight((j,), sched) == pytest.approx(want, rel=1e-12)


def test_pod_weight_pair_formula():
    sched = make_schedule(lam=1.0)
    b1, b4 = sched.b_bar[0], sched.b_bar[3]
    inner = (math.factorial(7) ** 2
             * (4.0 * b1 ** 2 / sched.j_bar) * (4.0 * b4 ** 2 / sched.j_bar)
             / sched.rho_max ** 2)
    want = inner ** 0.5
    assert pod_weight((1, 4), sched) == pytest.approx(want, rel=1e-12)


def test_pod_weight_symmetry_under_equal_bbar():
    b_bar = np.asarray([0.02, 0.02, 0.01, 0.02])
    sched = WeightSchedule.from_b_bar(b_bar, lam=0.9)
    assert pod_weight((1, 3), sched) == pytest.approx(pod_weight((2, 3), sched))
    assert pod_weight((1, 2), sched) == pytest.approx(pod_weight((2, 4), sched))


def test_pod_weight_depends_on_order_and_product_only():
    sched = make_schedule(s=8)
    # subsets with equal prod(b_bar^2) and equal size get equal weights:
    # b_bar_j ~ j^-2, so {1,6} and {2,3} share the product
    w16 = pod_weight((1, 6), sched)
    w23 = pod_weight((2, 3), sched)
    assert w16 == pytest.approx(w23, rel=1e-12)


# ---------------------------------------------------------------- cbc

def unit_product_weights(s):
    return ProductWeights(gamma=np.ones(s))


def test_cbc_first_component_is_one():
    for n in (8, 13):
        res = cbc_construct(n, 1, unit_product_weights(1))
        assert res.vector.z[0] == 1


def test_cbc_matches_global_pair_search():
    # with product weights the greedy pair for N=8 attains the global
    # 2-d minimum over all phi(8)^2 admissible pairs
    w = unit_product_weights(2)
    res = cbc_construct(8, 2, w)
    best = min(cbc_error_direct([z1, z2], 8, w)
               for z1 in (1, 3, 5, 7) for z2 in (1, 3, 5, 7))
    assert res.error_bound_by_dim[-1] == pytest.approx(best, abs=1e-14)


def test_cbc_error_nondecreasing_in_dimension():
    sched = make_schedule(s=6)
    res = cbc_construct(16, 6, sched)
    diffs = np.diff(res.error_bound_by_dim)
    assert np.all(diffs >= -1e-15)


def test_cbc_equals_exhaustive_per_dimension():
    # independent greedy driven by the explicit-subset error formula
    for n in (8, 16):
        for weights in (unit_product_weights(3), make_schedule(s=3)):
            res = cbc_construct(n, 3, weights)
            z_oracle, errs_oracle = cbc_greedy_exhaustive(n, 3, weights)
            np.testing.assert_allclose(res.error_bound_by_dim, errs_oracle,
                                       rtol=0, atol=1e-12)
            assert list(res.vector.z) == z_oracle


def test_cbc_direct_formula_agreement():
    # the incremental state machine and the subset enumeration agree on
    # the error of the final vector
    sched = make_schedule(s=4)
    res = cbc_construct(32, 4, sched)
    direct = cbc_error_direct(list(res.vector.z), 32, sched)
    assert res.error_bound_by_dim[-1] == pytest.approx(direct, rel=1e-12)


def test_cbc_rejects_degenerate_n():
    with pytest.raises(ValueError):
        cbc_construct(1, 2, unit_product_weights(2))


def test_cbc_embedded_single_level_equals_plain():
    sched = make_schedule(s=8)
    plain = cbc_construct(32, 8, sched)
    emb = cbc_construct_embedded(5, 5, 8, sched)
    np.testing.assert_array_equal(plain.vector.z, emb.vector.z)


def test_cbc_embedded_components_odd_and_deterministic():
    sched = make_schedule(s=5)
    a = cbc_construct_embedded(2, 6, 5, sched)
    b = cbc_construct_embedded(2, 6, 5, sched)
    np.testing.assert_array_equal(a.vector.z, b.vector.z)
    assert np.all(a.vector.z % 2 == 1)
    assert a.vector.n_points == 64


# ---------------------------------------------------------------- variance bound

def rho_product_weights(s, gamma=0.5, rho=2.0):
    return ProductWeights(gamma=np.full(s, gamma), lam=1.0,
                          rho=np.full(s, rho))


def test_variance_bound_zero_norm():
    assert variance_bound(rho_product_weights(3), 16, 8, 0.0, 3) == 0.0


def test_variance_bound_linear_in_shifts():
    w = rho_product_weights(3)
    one = variance_bound(w, 16, 8, 2.0, 3)
    two = variance_bound(w, 16, 16, 2.0, 3)
    assert two == pytest.approx(0.5 * one, rel=1e-14)


def test_variance_bound_prime_totient_direct():
    # independent recomputation: explicit subset sum with gamma^lam rho^|u|
    # and phi(N) = N - 1 for prime N
    s, lam, gamma, rho = 3, 1.0, 0.5, 2.0
    n, r, norm_sq = 13, 4, 1.7
    subset_sum = sum((gamma ** lam * rho) ** len(u)
                     for k in range(1, s + 1)
                     for u in itertools.combinations(range(s), k))
    want = (1.0 / r) * (1.0 + subset_sum) ** (1.0 / lam) * (n - 1) ** (-1.0 / lam) * norm_sq
    got = variance_bound(rho_product_weights(s, gamma, rho), n, r, norm_sq, s)
    assert got == pytest.approx(want, rel=1e-12)


def test_variance_bound_schedule_route():
    # the POD route must agree with pod_weight-driven subset enumeration
    sched = make_schedule(lam=0.8, s=3)
    n, r, norm_sq = 16, 2, 1.0
    rhos = sched.coordinate_rhos(3)
    subset_sum = 1.0
    for k in range(1, 4):
        for u in itertools.combinations(range(1, 4), k):
            g = pod_weight(u, sched)
            subset_sum += g ** sched.lam * math.prod(rhos[j - 1] for j in u)
    want = (1.0 / r) * subset_sum ** (1.0 / sched.lam) * euler_totient(n) ** (-1.0 / sched.lam) * norm_sq
    got = variance_bound(sched, n, r, norm_sq, 3)
    assert got == pytest.approx(want, rel=1e-10)
