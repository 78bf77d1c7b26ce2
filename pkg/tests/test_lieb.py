"""Trace-functional models: Lieb, Kronecker powers, entropies, fidelity."""

import numpy as np
import pytest

from tracelift.instances import random_density, random_matrix, random_pd
from tracelift.kernel import (
    RationalExponent,
    fidelity_value,
    herm_power,
    kron,
    lieb_value,
    tsallis_entropy,
    tsallis_rel_entropy,
    upsilon_value,
)
from tracelift.lieb import (
    build_fidelity,
    build_kron_power,
    build_lieb,
    build_multivariate,
    build_tsallis_entropy,
    build_tsallis_rel_entropy,
    build_upsilon,
    fidelity_witness,
    upsilon_equality_witness,
)
from tracelift.model import check_feasible
from tracelift.solver import solve


def _rel(got, want):
    return abs(got - want) / (1 + abs(want))


def _report(con, wit):
    return con.model.objective.functional.evaluate(wit) / con.report_divisor


class TestLieb:
    @pytest.mark.parametrize("t", ["1/3", "1/2", "2/3", "-1/2", "3/2"])
    def test_witness_tight(self, t, kab):
        K, A, B = kab
        texp = RationalExponent.parse(t)
        con = build_lieb(K, A, B, texp)
        wit = con.make_witness()
        assert check_feasible(con.model, wit, tol=1e-9).ok
        want = lieb_value(K, A, B, texp.fraction)
        assert _rel(_report(con, wit), want) < 1e-10

    def test_block_sizes(self, kab):
        # every LMI acts on the lifted nm-dimensional space: blocks are
        # size 2nm (two-by-two block LMIs) or nm (the cap), plus one
        # scalar pinching constraint
        K, A, B = kab
        n, m = A.shape[0], B.shape[0]
        con = build_lieb(K, A, B, RationalExponent(1, 3))
        assert all(size in (2 * n * m, n * m) for size, _ in con.model.lmi_census())
        assert con.model.scalar_count == 1

    def test_joint_concavity_midpoint(self, rng):
        # tr[K* A^{1-t} K B^t] is jointly concave for t in (0, 1)
        K = random_matrix(2, 2, rng)
        for _ in range(10):
            A1, A2 = random_pd(2, rng), random_pd(2, rng)
            B1, B2 = random_pd(2, rng), random_pd(2, rng)
            mid = lieb_value(K, (A1 + A2) / 2, (B1 + B2) / 2, 0.5)
            avg = (lieb_value(K, A1, B1, 0.5) + lieb_value(K, A2, B2, 0.5)) / 2
            assert mid >= avg - 1e-10


class TestKronPower:
    @pytest.mark.parametrize(("s", "t"), [("1/2", "1/2"), ("1/3", "1/3"), ("1/4", "1/2")])
    def test_witness_tight(self, s, t, rng):
        A = random_pd(2, rng)
        B = random_pd(2, rng)
        se, te = RationalExponent.parse(s), RationalExponent.parse(t)
        con = build_kron_power(A, B, se, te)
        wit = con.make_witness()
        assert check_feasible(con.model, wit, tol=1e-9).ok
        want = np.trace(
            kron(herm_power(A, se.fraction), herm_power(B, te.fraction))
        ).real
        assert _rel(_report(con, wit), want) < 1e-9


class TestMultivariate:
    def test_three_factor(self, rng):
        mats = [random_pd(2, rng) for _ in range(3)]
        ts = [RationalExponent(1, 4), RationalExponent(1, 4), RationalExponent(1, 2)]
        con = build_multivariate(mats, ts)
        wit = con.make_witness()
        assert check_feasible(con.model, wit, tol=1e-9).ok
        want = np.trace(
            kron(kron(herm_power(mats[0], 0.25), herm_power(mats[1], 0.25)),
                 herm_power(mats[2], 0.5))
        ).real
        assert _rel(_report(con, wit), want) < 1e-9


class TestTsallis:
    def test_entropy_witness(self, rng):
        A = random_density(3, rng)
        con = build_tsallis_entropy(A, RationalExponent(1, 4))
        wit = con.make_witness()
        assert check_feasible(con.model, wit, tol=1e-9).ok
        assert _rel(_report(con, wit), tsallis_entropy(A, 0.25)) < 1e-9

    def test_rel_entropy_solver(self, rng):
        A = random_density(2, rng)
        B = random_density(2, rng)
        con = build_tsallis_rel_entropy(A, B, RationalExponent(1, 4))
        res = solve(con.model)
        assert res.ok
        want = tsallis_rel_entropy(A, B, 0.25)
        assert abs(res.objective / con.report_divisor - want) < 1e-5


class TestUpsilon:
    @pytest.mark.parametrize("t", ["1/2", "-1/2", "3/2"])
    def test_equality_witness(self, t, kab):
        K, A, _ = kab
        texp = RationalExponent.parse(t)
        con = build_upsilon(K, A, texp)
        wit = upsilon_equality_witness(K, A, texp.fraction, con)
        assert check_feasible(con.model, wit, tol=1e-8).ok
        want = upsilon_value(K, A, texp.fraction)
        assert _rel(_report(con, wit), want) < 1e-8

    def test_variational_inequality(self, rng):
        # tr[(K* A^t K)^{1/t}] = inf_X { t tr[K* A^t K X^{1-t}] - (t-1) tr X }
        # for t > 1; any positive definite X gives an upper bound.
        K = random_matrix(2, 2, rng)
        A = random_pd(2, rng)
        t = 1.5
        want = upsilon_value(K, A, t)
        inner = K.conj().T @ herm_power(A, t) @ K
        for _ in range(5):
            X = random_pd(2, rng)
            upper = (t * np.trace(inner @ herm_power(X, 1 - t)).real
                     - (t - 1) * np.trace(X).real)
            assert upper >= want - 1e-9
        Xstar = herm_power(inner, 1 / t)
        tight = (t * np.trace(inner @ herm_power(Xstar, 1 - t)).real
                 - (t - 1) * np.trace(Xstar).real)
        assert abs(tight - want) < 1e-9


class TestFidelity:
    def test_witness_and_solver(self, rng):
        A = random_pd(2, rng, complex_=True)
        B = random_pd(2, rng, complex_=True)
        con = build_fidelity(A, B)
        wit = fidelity_witness(A, B, con)
        assert check_feasible(con.model, wit, tol=1e-9).ok
        want = fidelity_value(A, B)
        got = con.model.objective.functional.evaluate(wit)
        assert _rel(got, want) < 1e-9
        res = solve(con.model)
        assert res.ok
        assert _rel(res.objective, want) < 1e-6
