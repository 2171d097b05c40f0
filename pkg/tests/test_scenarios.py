import itertools
import json
import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from bellext.errors import DegenerateParameters
from bellext.probability import marginalize, max_abs_diff, moment
from bellext.representability import lp_interval
from bellext.scenarios import (
    GHSZ_PERFECT,
    HARDY_ANGLE,
    HARDY_MAX_PROBABILITY,
    Scenario,
    analyze_ghsz,
    build_ghsz_model,
    build_hardy_scenario,
    ghsz_sign_solutions,
    hardy_constraints,
    perfect_constraints,
)

from conftest import C_MINUS, C_PLUS


class TestSinglet:
    def test_singles(self, singlet):
        m = singlet.measurable_moments()
        for v in ("A1", "A2", "B1", "B2"):
            assert m[v] == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("pair,value", [("A1,B1", C_PLUS), ("A2,B1", C_PLUS), ("A1,B2", C_PLUS), ("A2,B2", C_MINUS)])
    def test_pairs(self, singlet, pair, value):
        assert singlet.measurable_moments()[pair] == pytest.approx(value, abs=1e-12)

    def test_a2b2_numeric(self, singlet):
        assert singlet.measurable_moments()["A2,B2"] == pytest.approx(0.0732233, abs=1e-7)


def hardy_margin_oracle(angle):
    """P(R1=+1, L1=-1) for L1, R1 along z and L2, R2 at ``angle``, from explicit kets."""
    up = lambda t: np.array([np.cos(t / 2), np.sin(t / 2)])
    dn = lambda t: np.array([-np.sin(t / 2), np.cos(t / 2)])
    a = np.kron(up(0), dn(0))
    b = np.kron(dn(angle), up(angle))
    psi = a - b * (b @ a)
    psi /= np.linalg.norm(psi)
    return float((np.kron(dn(0), up(0)) @ psi) ** 2)


class TestHardy:
    def test_zero_conditions(self, hardy):
        c = hardy_constraints(hardy.bch())
        for key in ("1-<A2>-<B1>+<A2B1>", "<A2>-<A2B2>", "<A1B2>"):
            assert abs(c[key]) <= 1e-9

    def test_margin_is_maximal(self, hardy):
        best = minimize_scalar(lambda t: -hardy_margin_oracle(t), bounds=(0, math.pi), method="bounded",
                               options={"xatol": 1e-10})
        margin = hardy_constraints(hardy.bch())["<A1>-<A1B1>"]
        assert margin == pytest.approx(-best.fun, abs=1e-9)
        assert margin == pytest.approx(0.09017, abs=1e-5)
        assert margin == pytest.approx(HARDY_MAX_PROBABILITY, abs=1e-12)
        assert best.x == pytest.approx(HARDY_ANGLE, abs=1e-4)

    def test_other_angles_still_hardy(self):
        s = build_hardy_scenario(left2=1.2, right2=2.0)
        c = hardy_constraints(s.bch())
        assert c["<A1>-<A1B1>"] > 1e-3

    def test_aligned_directions(self):
        with pytest.raises(DegenerateParameters):
            build_hardy_scenario(0.0, 0.0, 0.0, 0.0)

    def test_vanishing_state(self):
        # |L2-, R2+> equal to |L1+, R1-> up to phase
        with pytest.raises(DegenerateParameters):
            build_hardy_scenario(0.0, math.pi, 0.0, math.pi)

    def test_forced_zero(self, hardy):
        m = hardy.measurable_moments(["A1", "A2", "B2"])
        iv = lp_interval("A1,A2", m)
        assert (iv.lo, iv.hi) == pytest.approx((0.0, 0.0), abs=1e-9)


class TestGhszQuantum:
    @pytest.mark.parametrize("key,sign", list(GHSZ_PERFECT.items()))
    def test_perfect(self, ghsz, key, sign):
        assert ghsz.context_distribution(key).moment(key) == pytest.approx(sign, abs=1e-12)

    def test_singles_and_pairs_vanish(self, ghsz):
        for ctx in ghsz.contexts:
            d = ghsz.context_distribution(ctx)
            for r in (1, 2):
                for sub in itertools.combinations(ctx, r):
                    assert moment(d, sub) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("key", [("A1", "B2", "C1"), ("A2", "B1", "C1"), ("A2", "B2", "C2"), ("A1", "B1", "C2")])
    def test_other_triples_vanish(self, ghsz, key):
        assert ghsz.context_distribution(key).moment(key) == pytest.approx(0.0, abs=1e-12)


class TestGhszModels:
    def test_model1(self, model1):
        assert model1.moment("A1,B1,C1") == pytest.approx(-1)
        assert model1.moment("A1,A2,B1,B2") == pytest.approx(1)
        assert sum(w > 0 for w in model1.weights) == 8

    def test_model2(self, model2):
        assert model2.moment("A1,B2,C2") == pytest.approx(1)
        assert model2.moment("A1,A2,B1,B2") == pytest.approx(-1)

    @pytest.mark.parametrize("which", [1, 2])
    def test_vanishing_ab_moments(self, which):
        d = build_ghsz_model(which)
        assert d.moment("B1,B2") == 0
        for key in ("A1,B1,B2", "A2,B1,B2", "B1,A1,A2", "B2,A1,A2", "A1,A2"):
            assert d.moment(key) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("which", [1, 2])
    def test_atomwise_agreement(self, ghsz, which):
        d = build_ghsz_model(which)
        for ctx in ghsz.contexts:
            if f"C{which}" in ctx:
                assert max_abs_diff(ghsz.context_distribution(ctx), marginalize(d, ctx)) <= 1e-12

    def test_bad_model(self):
        with pytest.raises(ValueError):
            build_ghsz_model(3)


class TestAnalyzeGhsz:
    def test_summary(self):
        a = analyze_ghsz()
        assert a.shared_moments_agree
        assert a.four_correlation == pytest.approx((1.0, -1.0), abs=1e-12)
        assert a.parity_obstruction and a.parity_solutions == 0
        assert a.atomwise and a.max_context_error <= 1e-12
        lo1, lo2 = a.uniqueness
        assert (lo1.lo, lo1.hi) == pytest.approx((1, 1), abs=1e-9)
        assert (lo2.lo, lo2.hi) == pytest.approx((-1, -1), abs=1e-9)

    def test_parity_search_exhausts_64(self):
        assert ghsz_sign_solutions() == []
        # dropping any one perfect correlation makes the system solvable
        for drop in GHSZ_PERFECT:
            rest = {k: v for k, v in GHSZ_PERFECT.items() if k != drop}
            count = 0
            for values in itertools.product((-1, 1), repeat=6):
                a = dict(zip(("A1", "A2", "B1", "B2", "C1", "C2"), values))
                count += all(math.prod(a[v] for v in k) == s for k, s in rest.items())
            assert count > 0

    def test_model_pair_marginals(self, model1, model2):
        for d in (model1, model2):
            assert marginalize(d, ["A1", "A2"]).moment("A1,A2") == 0

    def test_uniqueness_uses_only_perfect_data(self):
        m = perfect_constraints(1)
        assert len(m) == 2


class TestScenarioJson:
    @pytest.mark.parametrize("name", ["singlet", "hardy", "ghsz"])
    def test_round_trip(self, name, request):
        s = request.getfixturevalue(name)
        back = Scenario.from_json(json.loads(json.dumps(s.to_json())))
        assert back.contexts == s.contexts
        for ctx in s.contexts:
            assert max_abs_diff(s.context_distribution(ctx), back.context_distribution(ctx)) <= 1e-12

    def test_moment_source(self):
        obj = {
            "name": "classical",
            "domain": "01",
            "variables": ["A1", "A2", "B1", "B2"],
            "contexts": [["A1", "B1"], ["A1", "B2"], ["A2", "B1"], ["A2", "B2"]],
            "source": {"type": "moments", "entries": {"A1": 0.5, "A2": 0.5, "B1": 0.5, "B2": 0.5,
                                                      "A1,B1": 0.25, "A1,B2": 0.25, "A2,B1": 0.25, "A2,B2": 0.25}},
        }
        s = Scenario.from_json(obj)
        assert s.bch() is not None
        assert s.predictions()["A1,B1"] == {"A1": 0.5, "B1": 0.5, "A1,B1": 0.25}
        assert Scenario.from_json(s.to_json()).moments.entries == s.moments.entries
