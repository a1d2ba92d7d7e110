"""Acceptance suite: one test and one summary line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the pass/fail lines appear
in the "acceptance criteria" section of the terminal summary.
"""
import itertools
import time

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from strategies import mean_half_qlaws, nu_measures, small_specs, symmetric_measures
from exchev import cli
from exchev.estimation import estimate_pickands, singular_frequency, singular_paths
from exchev.extendibility import (CondIIDSpec, ContinuousUnitMeanDF, DiscreteUnitMeanDF,
                                  af_continuous, af_discrete, check_necessary_continuous,
                                  check_necessary_discrete, ell_from_condiid, qf_density,
                                  qf_discrete, spectral_from_condiid)
from exchev.sampling import RngStream, SampleBatch, sample_condiid, sample_maxlinear
from exchev.spectral import (DiscreteSpectralMeasure, NuMeasure, bc2_A, bc2_law,
                             embedding_obstruction_check, eval_ell, margin_measure,
                             mix_pickands, pickands_from_ell, q_from_A, simplex_decompose,
                             symmetrize)

GRID = np.arange(1, 10) / 10.0
N_MC = 100_000


def _run(acceptance, number, budget, checks):
    """Evaluate ``checks() -> (ok, detail)``, record the line, then assert."""
    t0 = time.perf_counter()
    try:
        ok, detail = checks()
    except Exception as exc:
        acceptance(number, False, f"error: {exc!r}")
        raise
    elapsed = time.perf_counter() - t0
    in_budget = elapsed < budget
    acceptance(number, ok and in_budget, f"{detail}; {elapsed:.2f}s (budget {budget}s)")
    assert ok, detail
    assert in_budget, f"took {elapsed:.2f}s, budget {budget}s"


# 1 ------------------------------------------------------------------------

def test_criterion_1_nonunique_mixing(acceptance):
    def checks():
        x = np.linspace(0.0, 1.0, 1001)
        first = {(0.0, 1.0): 0.25, (1 / 3, 2 / 3): 0.75}
        second = {(0.0, 2 / 3): 0.5, (1 / 3, 1.0): 0.5}
        lhs = mix_pickands(list(first.values()), [bc2_A(*k) for k in first])
        rhs = mix_pickands(list(second.values()), [bc2_A(*k) for k in second])
        gap = float(np.max(np.abs(lhs(x) - rhs(x))))
        # the second mixture uses asymmetric components, so no BC2 element
        # of one representation appears in the other
        distinct = set(first).isdisjoint(second) and not bc2_A(0.0, 2 / 3).is_symmetric()
        nu = simplex_decompose(lhs)
        unique_nu = nu == NuMeasure([0.0, 1 / 3], [0.25, 0.75])
        ok = gap <= 1e-12 and distinct and unique_nu
        return ok, f"max gap {gap:.2e} over 1001 x, representations distinct={distinct}"

    _run(acceptance, 1, 1.0, checks)


# 2 ------------------------------------------------------------------------

def test_criterion_2_cuadras_auge(acceptance):
    def checks():
        x = np.linspace(0.0, 1.0, 101)
        worst_q, worst_a = 0.0, 0.0
        for theta in (0.25, 0.5, 0.75):
            law = qf_discrete(DiscreteUnitMeanDF.cuadras_auge(theta))
            want = oracles.ca_qlaw(theta)
            if sorted(law.q.tolist()) != sorted(want):
                return False, f"theta={theta}: support {law.q.tolist()}"
            worst_q = max(worst_q, max(abs(law.mass_at(q) - p) for q, p in want.items()))
            A = af_discrete(DiscreteUnitMeanDF.cuadras_auge(theta))
            worst_a = max(worst_a, float(np.max(np.abs(A(x) - oracles.ca_pickands(theta, x)))))
        ok = worst_q == 0.0 and worst_a <= 1e-12
        return ok, f"Q-law mass error {worst_q:.1e}, A error {worst_a:.1e}"

    _run(acceptance, 2, 1.0, checks)


# 3 ------------------------------------------------------------------------

def test_criterion_3_exponential(acceptance):
    def checks():
        F = ContinuousUnitMeanDF.exponential()
        xs = np.linspace(0.0, 1.0, 21)
        a_err = max(abs(af_continuous(F, x) - oracles.exp_pickands(x)) for x in xs)
        qs = np.round(np.arange(1, 20) * 0.05, 12)
        f = np.array([qf_density(F, q) for q in qs])
        f_err = float(np.max(np.abs(f - 1.0)))
        verdict = check_necessary_continuous(qs, f)
        eq_gap = abs(verdict.details["f_half"] - 1.0)
        ok = a_err <= 1e-8 and f_err <= 1e-6 and verdict.passed and eq_gap <= 1e-6
        return ok, (f"A error {a_err:.1e}, density error {f_err:.1e}, "
                    f"verdict={'PASS' if verdict.passed else 'FAIL'}")

    _run(acceptance, 3, 5.0, checks)


# 4 ------------------------------------------------------------------------

def _random_unit_mean_df(rng):
    k = int(rng.integers(1, 7))
    x = rng.exponential(size=k) * (rng.random(size=k) > 0.2)
    if not np.any(x > 0):
        x[0] = 1.0
    p = rng.dirichlet(np.ones(k))
    return DiscreteUnitMeanDF(x / (p @ x), p)


def test_criterion_4_discrete_checker(acceptance):
    def checks():
        fails = []
        for q in (0.1, 0.25, 0.4):
            v = check_necessary_discrete(bc2_law(q, 1 - q))
            fails.append((not v.passed) and v.witness_q is not None
                         and abs(v.witness_q - q) < 1e-12)
        rng = np.random.default_rng(4)
        passes = [check_necessary_discrete(qf_discrete(_random_unit_mean_df(rng))).passed
                  for _ in range(200)]
        ok = all(fails) and all(passes)
        return ok, f"BC2 failures {sum(fails)}/3 with witness q, random F passes {sum(passes)}/200"

    _run(acceptance, 4, 10.0, checks)


# 5 ------------------------------------------------------------------------

def _random_symmetric_measure(rng, d):
    k = int(rng.integers(1, 4))
    reps = rng.dirichlet(np.ones(d), size=k)
    w = rng.dirichlet(np.ones(k))
    parts = [symmetrize(r) for r in reps]
    pts = np.vstack([p.points for p in parts])
    ms = np.concatenate([wi * p.masses for wi, p in zip(w, parts)])
    return DiscreteSpectralMeasure(pts, ms / ms.sum(), symmetric=True)


def test_criterion_5_margin_construction(acceptance):
    def checks():
        marg = margin_measure(symmetrize(np.array(oracles.FIGURE_ATOM)), 2)
        err = 0.0
        for q, p in oracles.FIGURE_MARGIN.items():
            hit = np.abs(marg.points[:, 0] - q) <= 1e-12
            if hit.sum() != 1:
                return False, f"no unique atom at q={q}"
            err = max(err, abs(marg.masses[hit][0] - p))
        rng = np.random.default_rng(5)
        exceeded = 0
        for r in range(100):
            rep = embedding_obstruction_check(_random_symmetric_measure(rng, 3 + r % 3), 2)
            exceeded += rep.has_distinct_positive_atom and rep.support_size > 2
        ok = marg.n_atoms == 6 and err <= 1e-12 and exceeded == 100
        return ok, f"{marg.n_atoms} atoms, mass error {err:.1e}, obstruction {exceeded}/100"

    _run(acceptance, 5, 10.0, checks)


# 6 ------------------------------------------------------------------------

def test_criterion_6_figure(acceptance, tmp_path, capsys):
    def checks():
        code = cli.main(["figure", "--out", str(tmp_path / "fig")])
        capsys.readouterr()
        pair = SampleBatch.from_csv(str(tmp_path / "fig_u12.csv"))
        full = SampleBatch.from_csv(str(tmp_path / "fig_u123.csv"))
        paths = singular_paths(pair, 0, 1)
        ratios = [p["ratio"] for p in paths]
        want = sorted(oracles.FIGURE_RATIOS)
        match = len(ratios) == 6 and all(abs(a - b) <= 1e-9 for a, b in zip(ratios, want))
        freq = singular_frequency(paths)
        # oracle: argmin ties of an independent max-linear draw, 10^6 rows
        perms, masses = oracles.permutation_atoms(oracles.FIGURE_ATOM)
        coefs = [(3 * m * q[0], 3 * m * q[1]) for q, m in zip(perms, masses)]
        mc = oracles.independent_shared_argmin_mc(coefs, 10**6, seed=606)
        exact = oracles.maxlinear_shared_argmin(coefs)
        ok = (code == 0 and full.n == 2500 and full.d == 3 and match
              and abs(freq - mc) <= 0.03 and abs(mc - oracles.FIGURE_SINGULAR_MASS) < 0.003
              and abs(exact - oracles.FIGURE_SINGULAR_MASS) < 1e-12)
        return ok, (f"{full.n} rows, {len(ratios)} clusters, singular frequency {freq:.4f} "
                    f"vs oracle {mc:.4f} (exact {exact:.4f})")

    _run(acceptance, 6, 30.0, checks)


# 7 ------------------------------------------------------------------------

def test_criterion_7_maxlinear_sampler(acceptance):
    def checks():
        fig = symmetrize(np.array(oracles.FIGURE_ATOM))
        cases = {
            "comonotone": (DiscreteSpectralMeasure.comonotone(2),
                           lambda x: np.maximum(x, 1 - x)),
            "independence": (DiscreteSpectralMeasure.independence(2), lambda x: np.ones_like(x)),
            "BC2(1/4,3/4)": (DiscreteSpectralMeasure.from_qlaw(bc2_law(0.25, 0.75)),
                             lambda x: oracles.bc2_pickands_from_two_points(0.25, 0.75, x)),
            "figure margin": (fig, pickands_from_ell(margin_measure(fig, 2))),
        }
        errs = {}
        for s, (name, (m, A)) in enumerate(cases.items()):
            batch = sample_maxlinear(m, N_MC, RngStream(7, s))
            errs[name] = estimate_pickands(batch, 0, 1, GRID).sup_error(A)
        ok = all(e <= 0.02 for e in errs.values())
        return ok, ", ".join(f"{k} {v:.4f}" for k, v in errs.items())

    _run(acceptance, 7, 60.0, checks)


# 8 ------------------------------------------------------------------------

def test_criterion_8_condiid_sampler(acceptance):
    def checks():
        theta = 0.5
        spec = CondIIDSpec.single(DiscreteUnitMeanDF.cuadras_auge(theta), 0.0)
        b2 = sample_condiid(spec, 2, N_MC, RngStream(8, 0))
        err2 = estimate_pickands(b2, 0, 1, GRID).sup_error(lambda x: oracles.ca_pickands(theta, x))
        b5 = sample_condiid(spec, 5, N_MC, RngStream(8, 1))
        ests = [estimate_pickands(b5, i, j, GRID).raw
                for i, j in itertools.combinations(range(5), 2)]
        pair_gap = max(float(np.max(np.abs(a - b))) for a, b in itertools.combinations(ests, 2))
        ml = sample_maxlinear(spectral_from_condiid(spec, 2), N_MC, RngStream(8, 2))
        cross = float(np.max(np.abs(estimate_pickands(ml, 0, 1, GRID).raw
                                    - estimate_pickands(b2, 0, 1, GRID).raw)))
        ok = err2 <= 0.02 and pair_gap <= 0.03 and cross <= 0.02
        return ok, (f"d=2 error {err2:.4f}, d=5 pairwise gap {pair_gap:.4f} over 10 pairs, "
                    f"cross-sampler {cross:.4f}")

    _run(acceptance, 8, 120.0, checks)


# 9 ------------------------------------------------------------------------

def _vec(draw, d):
    return np.array(draw(st.lists(st.floats(0.0, 10.0), min_size=d, max_size=d)))


N_CASES = 1000


@settings(max_examples=N_CASES, database=None)
@given(m=symmetric_measures(), data=st.data(), t=st.floats(0.0, 50.0))
def _homogeneity_and_bounds(m, data, t):
    x = _vec(data.draw, m.d)
    v = eval_ell(m, x)
    assert abs(eval_ell(m, t * x) - t * v) <= 1e-12 * max(1.0, t * v)
    assert x.max() - 1e-12 * max(1.0, x.max()) <= v <= x.sum() + 1e-12 * max(1.0, x.sum())


@settings(max_examples=N_CASES, database=None)
@given(m=symmetric_measures(dims=(3, 4)), data=st.data())
def _margin_consistency(m, data):
    n = data.draw(st.integers(2, m.d - 1))
    x = _vec(data.draw, n)
    full = eval_ell(m, np.concatenate([x, np.zeros(m.d - n)]))
    assert abs(eval_ell(margin_measure(m, n), x) - full) <= 1e-12 * max(1.0, full)


@settings(max_examples=N_CASES, database=None)
@given(law=mean_half_qlaws())
def _a_q_round_trip(law):
    back = q_from_A(law.pickands())
    assert back.n_atoms == law.n_atoms
    for q, p in zip(law.q, law.p):
        assert abs(back.mass_at(q) - p) <= 1e-12
    assert abs(back.pickands().sup_distance(law.pickands())) <= 1e-12


@settings(max_examples=N_CASES, database=None)
@given(nu=nu_measures())
def _a_nu_round_trip(nu):
    A = nu.recompose()
    back = simplex_decompose(A)
    assert back.q.shape == nu.q.shape
    assert np.all(np.abs(back.q - nu.q) <= 1e-12)
    assert np.all(np.abs(back.mass - nu.mass) <= 1e-12)
    assert simplex_decompose(A).recompose().sup_distance(A) <= 1e-12


@settings(max_examples=N_CASES, database=None)
@given(spec=small_specs(), d=st.sampled_from([2, 3]), data=st.data())
def _condiid_equivalence(spec, d, data):
    x = _vec(data.draw, d)
    a = ell_from_condiid(spec, x)
    b = eval_ell(spectral_from_condiid(spec, d), x)
    assert abs(a - b) <= 1e-12 * max(1.0, a)


PROPERTIES = {
    "homogeneity+bounds": _homogeneity_and_bounds,
    "margin consistency": _margin_consistency,
    "A<->Q round trip": _a_q_round_trip,
    "A<->nu round trip": _a_nu_round_trip,
    "condiid ell equivalence": _condiid_equivalence,
}


def test_criterion_9_exact_algebra(acceptance):
    def checks():
        failed = []
        for name, prop in PROPERTIES.items():
            try:
                prop()
            except Exception as exc:  # hypothesis re-raises the minimal failure
                failed.append(f"{name}: {type(exc).__name__}")
        ok = not failed
        detail = f"{len(PROPERTIES)} properties x {N_CASES} cases"
        return ok, detail if ok else detail + "; failed " + "; ".join(failed)

    _run(acceptance, 9, 60.0, checks)
