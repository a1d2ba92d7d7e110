import json
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

import oracles
from exchev.errors import CapacityError, InvariantError
from exchev.extendibility import (CondIIDSpec, ContinuousUnitMeanDF, DiscreteUnitMeanDF, Verdict,
                                  af_continuous, af_discrete, af_discrete_integral,
                                  check_necessary_continuous, check_necessary_discrete,
                                  ell_from_condiid, qf_density, qf_discrete,
                                  spectral_from_condiid)
from exchev.spectral import QLaw, bc2_law, eval_ell


class TestDiscreteDF:
    def test_unit_mean_enforced(self):
        with pytest.raises(InvariantError) as exc:
            DiscreteUnitMeanDF([0.0, 1.0], [0.5, 0.5])
        assert exc.value.invariant == "unit-mean"

    def test_rejects_negative_support(self):
        with pytest.raises(InvariantError):
            DiscreteUnitMeanDF([-1.0, 3.0], [0.5, 0.5])

    def test_cdf_conventions(self):
        F = DiscreteUnitMeanDF.cuadras_auge(0.5)
        assert F.cdf(0.0) == 0.5 and F.cdf_left(0.0) == 0.0
        assert F.cdf(2.0) == 1.0 and F.cdf_left(2.0) == 0.5
        assert F.zero_mass == 0.5

    def test_cuadras_auge_range(self):
        for bad in (0.0, 1.5):
            with pytest.raises(InvariantError):
                DiscreteUnitMeanDF.cuadras_auge(bad)
        assert DiscreteUnitMeanDF.cuadras_auge(1.0) == DiscreteUnitMeanDF.point_mass()

    def test_json(self):
        F = DiscreteUnitMeanDF([0.0, 0.5, 4.25], [0.5, 0.3, 0.2])
        assert DiscreteUnitMeanDF.from_dict(json.loads(json.dumps(F.to_dict()))) == F


class TestQF:
    @pytest.mark.parametrize("theta", [0.25, 0.5, 0.75])
    def test_cuadras_auge(self, theta):
        law = qf_discrete(DiscreteUnitMeanDF.cuadras_auge(theta))
        for q, p in oracles.ca_qlaw(theta).items():
            assert law.mass_at(q) == pytest.approx(p, abs=1e-15)

    def test_point_mass(self):
        law = qf_discrete(DiscreteUnitMeanDF.point_mass())
        assert law.n_atoms == 1 and law.q[0] == 0.5

    def test_matches_enumeration(self):
        x, p = [0.0, 0.5, 4.25], [0.5, 0.3, 0.2]
        law = qf_discrete(DiscreteUnitMeanDF(x, p))
        ref = oracles.discrete_qf_brute(x, p)
        assert law.n_atoms == len(ref)
        for q, mass in ref.items():
            assert law.mass_at(q, tol=1e-11) == pytest.approx(mass, abs=1e-14)

    def test_exact_mode(self):
        law = qf_discrete(DiscreteUnitMeanDF.cuadras_auge(0.5), exact=True)
        assert law.mass_at(0.5) == 0.5 and law.mass_at(0.0) == 0.25
        thirds = qf_discrete(DiscreteUnitMeanDF([1 / 3, 5 / 3], [0.5, 0.5]), exact=True)
        # (x_i + x_j)/2 * p_i p_j = 1 * 1/4 at 1/6 and at 5/6
        assert thirds.mass_at(1 / 6) == pytest.approx(0.25, abs=1e-15)
        assert thirds.mass_at(0.5) == pytest.approx(float(Fraction(1, 3) * Fraction(1, 4)
                                                          + Fraction(5, 3) * Fraction(1, 4)))

    def test_is_symmetric(self):
        assert qf_discrete(DiscreteUnitMeanDF([0.0, 0.5, 4.25], [0.5, 0.3, 0.2])).is_symmetric()


class TestAF:
    @pytest.mark.parametrize("theta", [0.25, 0.5, 0.75])
    def test_cuadras_auge(self, theta):
        x = np.linspace(0, 1, 101)
        A = af_discrete(DiscreteUnitMeanDF.cuadras_auge(theta))
        assert np.max(np.abs(A(x) - oracles.ca_pickands(theta, x))) <= 1e-12

    def test_paths_agree(self):
        F = DiscreteUnitMeanDF([0.0, 0.5, 4.25], [0.5, 0.3, 0.2])
        A = af_discrete(F)
        for x in np.linspace(0, 1, 37):
            assert A(x) == pytest.approx(af_discrete_integral(F, x), abs=1e-12)
        assert A.sup_distance(qf_discrete(F).pickands()) <= 1e-12

    def test_exponential(self):
        F = ContinuousUnitMeanDF.exponential()
        for x in (0.0, 0.1, 0.5, 0.77, 1.0):
            assert af_continuous(F, x) == pytest.approx(oracles.exp_pickands(x), abs=1e-8)

    @pytest.mark.parametrize("k", [0.5, 2.0, 3.5])
    def test_gamma_density_is_beta(self, k):
        F = ContinuousUnitMeanDF.gamma(k)
        for q in (0.1, 0.3, 0.5, 0.8):
            assert qf_density(F, q) == pytest.approx(stats.beta(k, k).pdf(q), rel=1e-7)

    def test_uniform_family_mean(self):
        F = ContinuousUnitMeanDF.uniform()
        assert af_continuous(F, 0.5) < 1.0
        assert qf_density(F, 0.5) > 0

    def test_continuous_validation(self):
        with pytest.raises(InvariantError):
            ContinuousUnitMeanDF(lambda t: np.exp(-t / 2) / 2)


class TestCheckers:
    @pytest.mark.parametrize("q", [0.1, 0.25, 0.4])
    def test_bc2_fails_with_witness(self, q):
        v = check_necessary_discrete(bc2_law(q, 1 - q))
        assert not v.passed and v.witness_q == pytest.approx(q)
        assert v.lhs > v.rhs

    def test_cuadras_auge_passes(self):
        v = check_necessary_discrete(qf_discrete(DiscreteUnitMeanDF.cuadras_auge(0.5)))
        assert v.passed and v.witness_q is None

    def test_endpoint_atoms_unconstrained(self):
        # Q in {0, 1} is the independence law, which is conditionally iid
        assert check_necessary_discrete(QLaw([0.0, 1.0], [0.5, 0.5])).passed

    def test_no_atom_at_half(self):
        v = check_necessary_discrete(QLaw([0.25, 0.75], [0.5, 0.5]))
        assert not v.passed and v.witness_q == 0.25

    def test_verdict_json(self):
        v = check_necessary_discrete(bc2_law(0.25, 0.75))
        doc = json.loads(v.to_json())
        assert set(doc) == {"pass", "witness_q", "lhs", "rhs"}
        assert doc["pass"] is False and doc["witness_q"] == 0.25
        assert isinstance(v, Verdict)

    def test_continuous_exponential(self):
        q = np.union1d(np.arange(1, 20) / 20, [0.5])
        v = check_necessary_continuous(q, np.ones_like(q))
        assert v.passed and v.details["grid_resolution"] == pytest.approx(0.05)

    def test_continuous_fails_on_spike(self):
        q = np.array([0.1, 0.5, 0.9])
        v = check_necessary_continuous(q, np.array([50.0, 1.0, 1.0]))
        assert not v.passed and v.witness_q == pytest.approx(0.1)

    def test_continuous_needs_half(self):
        with pytest.raises(InvariantError):
            check_necessary_continuous(np.array([0.25, 0.75]), np.ones(2))


class TestCondIID:
    def test_ell_ca(self):
        for theta, want in oracles.CA_ELL_ONES.items():
            spec = CondIIDSpec.single(DiscreteUnitMeanDF.cuadras_auge(theta), 0.0)
            assert ell_from_condiid(spec, np.ones(2)) == pytest.approx(want, abs=1e-15)

    def test_b_one_is_independence(self):
        spec = CondIIDSpec.single(DiscreteUnitMeanDF.point_mass(), 1.0)
        assert ell_from_condiid(spec, np.array([0.2, 0.3, 0.4])) == pytest.approx(0.9)

    def test_spectral_equivalence(self):
        spec = CondIIDSpec(0.3, [(0.4, DiscreteUnitMeanDF.cuadras_auge(0.25)),
                                 (0.6, DiscreteUnitMeanDF([0.0, 0.5, 4.25], [0.5, 0.3, 0.2]))])
        m = spectral_from_condiid(spec, 3)
        assert m.is_exchangeable()
        for x in np.random.default_rng(3).exponential(size=(20, 3)):
            assert eval_ell(m, x) == pytest.approx(ell_from_condiid(spec, x), abs=1e-12)

    def test_enumeration_cap(self):
        F = DiscreteUnitMeanDF(np.linspace(0, 2, 11), np.full(11, 1 / 11))
        with pytest.raises(CapacityError):
            spectral_from_condiid(CondIIDSpec.single(F), 6)

    def test_spec_validation(self):
        with pytest.raises(InvariantError):
            CondIIDSpec(1.5, [(1.0, DiscreteUnitMeanDF.point_mass())])
        with pytest.raises(InvariantError):
            CondIIDSpec(0.0, [(0.5, DiscreteUnitMeanDF.point_mass())])

    def test_json(self):
        spec = CondIIDSpec(0.25, [(1.0, DiscreteUnitMeanDF.cuadras_auge(0.5))])
        assert CondIIDSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
