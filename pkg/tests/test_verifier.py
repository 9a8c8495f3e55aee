import math
import re

import numpy as np
import pytest

from ifslab import verifier as V
from ifslab.codespace import Alphabet, Word, parse_address, periodicize, prefix
from ifslab.contractions import ContractionMap, eval_word
from ifslab.ifscore import IfsInstance, attractor, coding_map, invariant_superset
from ifslab.metricsets import PointCloud
from oracles import cantor_instance, identity_instance

A2 = Alphabet(2)
CANTOR = cantor_instance()


@pytest.fixture(scope="module")
def cantor_attr():
    return attractor(CANTOR)


def test_report_line_format():
    rep = V.CheckReport("demo", False, 0.5, 0.25, {"w": np.array([1.0, 2.0]), "a": Word((0, 1), A2)}, {"n": 3})
    line = rep.line()
    assert re.fullmatch(r"CHECK demo FAIL residual=0\.5 tol=0\.25 witness=\{.*\} params=\{\"n\": 3\}", line)
    assert '"w": [1.0, 2.0]' in line and '"a": "0.1"' in line


def test_sample_addresses_cover_short_periods():
    addrs = V.sample_addresses(A2)
    assert len(set(addrs)) == len(addrs)
    periodic = {a for a in addrs if len(a.preperiod) == 0 and len(a.period) <= 4}
    # primitive binary necklaces-by-rotation of length <= 4: 2 + 2 + 6 + 12
    assert len(periodic) >= 22
    assert V.sample_addresses(A2, seed=1) == V.sample_addresses(A2, seed=1)


def test_union_inequality_examples():
    rep = V.check_union_inequality(100, 3, 5, rng_seed=7)
    assert rep.passed and rep.residual <= 1e-12
    single = V.check_union_inequality(30, 1, 5, rng_seed=7)
    assert single.residual == 0.0
    with pytest.raises(ValueError):
        V.check_union_inequality(0)


def test_equivariance_examples(sierpinski):
    rep = V.check_equivariance(CANTOR, [parse_address("|1", A2)])
    assert rep.passed and rep.residual <= 1e-15
    fixed = V.check_equivariance(CANTOR, [periodicize(Word((0,), A2))])
    assert fixed.residual == 0.0
    addrs = V.random_addresses(sierpinski.alphabet, 20, seed=2)
    rep = V.check_equivariance(sierpinski, addrs)
    assert rep.passed and rep.residual <= 10 * sierpinski.tol_point


def test_point_fibred_cantor():
    B = PointCloud([[0.0], [1.0]])
    addrs = V.sample_addresses(A2)
    rep = V.check_point_fibred(CANTOR, B, range(1, 13), addrs, threshold=1e-5)
    assert rep.passed
    prof = rep.details["profile"]
    assert all(s <= 3.0**-n + 1e-15 for n, s in zip(range(1, 13), prof))
    assert prof[-1] < 1e-5


def test_point_fibred_at_the_coded_point():
    w = Word((0, 1, 1), A2)
    a = periodicize(w)
    B = PointCloud([coding_map(CANTOR, a)])
    prof, _ = V.point_fibred_profile(CANTOR, B, [3, 6, 9, 12], [a])
    assert max(prof) <= 1e-15


def test_point_fibred_identity_fails():
    S = identity_instance()
    rep = V.check_point_fibred(S, PointCloud([[0.0], [1.0]]), range(1, 9), V.sample_addresses(S.alphabet))
    assert not rep.passed
    prof = rep.details["profile"]
    assert all(b >= a for a, b in zip(prof, prof[1:])) and prof[-1] == 1.0


def test_point_fibred_witness_reproduces_value():
    rep = V.check_point_fibred(CANTOR, PointCloud([[0.0], [5.0]]), range(1, 9), V.sample_addresses(A2))
    w = rep.witness
    a = parse_address(w["address"], A2)
    x = np.array(w["point"])
    d = float(np.linalg.norm(eval_word(CANTOR.maps, prefix(a, w["depth"]), x) - coding_map(CANTOR, a)))
    assert w["value"] == rep.residual
    assert d == pytest.approx(w["value"], rel=1e-12)


def test_fixed_points_examples(sierpinski):
    rep = V.check_fixed_points(CANTOR, 4)
    assert rep.passed and rep.params["words"] == 30
    tri = V.check_fixed_points(sierpinski, 3)
    assert tri.passed
    from ifslab.codespace import enumerate_words_upto
    from ifslab.ifscore import word_fixed_point

    for w in enumerate_words_upto(sierpinski.alphabet, 3):
        x, y = word_fixed_point(sierpinski, w)
        assert x >= -1e-12 and y >= -1e-12 and x + y <= 1 + 1e-12


def test_periodic_density_cantor(cantor_attr):
    prof = V.density_profile(CANTOR, [2, 4, 6, 8], cantor_attr.cloud)
    assert all(b < a for a, b in zip(prof, prof[1:]))
    for L, e in zip([2, 4, 6, 8], prof):
        assert e <= 3.0**-L + CANTOR.tol_attr + CANTOR.dedup
    rep = V.check_periodic_density(CANTOR, [2, 4, 6, 8], cantor_attr)
    assert rep.details == {} and rep.witness["profile"] == prof
    assert not rep.passed  # e_8 ~ 1.5e-4 sits above 10 tol_attr + dedup


def test_periodic_density_passes_when_deep_enough():
    S = cantor_instance(tol_attr=1e-3)
    rep = V.check_periodic_density(S, [2, 4, 6, 8])
    assert rep.passed, rep.line()


def test_periodic_density_single_map():
    S = IfsInstance((ContractionMap.affine([[0.5]], [0.0]),))
    rep = V.check_periodic_density(S, [1, 2, 3])
    assert rep.passed and rep.witness["profile"] == [0.0, 0.0, 0.0]


def test_pi_continuity_cantor(cantor_attr):
    M = invariant_superset(CANTOR, PointCloud([[0.0], [1.0]]), 20, cantor_attr)
    rep = V.check_pi_continuity(CANTOR, range(0, 9), M=M)
    assert rep.passed, rep.line()
    w = rep.witness
    assert w["distance"] <= 3.0 ** -w["prefix_len"] * 1.0 + 1e-12


def test_nestedness_cantor(cantor_attr):
    M = invariant_superset(CANTOR, PointCloud([[0.0], [1.0]]), 20, cantor_attr)
    rep = V.check_nestedness(CANTOR, M, V.sample_addresses(A2), threshold=2e-6)
    assert rep.passed
    assert rep.witness["diams"][-1] == pytest.approx(3.0**-12, rel=1e-9)
    strict = V.check_nestedness(CANTOR, M, V.sample_addresses(A2))
    assert not strict.passed and strict.residual < math.inf


def test_chain_cantor_all_pass():
    res = V.run_implication_chain(cantor_instance(tol_attr=1e-4))
    rep = res.by_id()
    assert [r.check_id for r in res.reports] == list(V.CHAIN_STEPS) + ["chain"]
    assert all(rep[c].passed for c in V.CHAIN_STEPS), [rep[c].line() for c in V.CHAIN_STEPS]
    assert res.consistent and rep["chain"].passed


def test_chain_identity_fails_consistently():
    res = V.run_implication_chain(identity_instance(max_iter=20))
    rep = res.by_id()
    assert not rep["phi-contractive"].passed and not rep["diminishing"].passed
    assert res.consistent


def test_chain_flags_inconsistency(monkeypatch):
    real = V.check_point_fibred

    def broken(*args, **kw):
        rep = real(*args, **kw)
        rep.passed = False
        return rep

    monkeypatch.setattr(V, "check_point_fibred", broken)
    res = V.run_implication_chain(cantor_instance(tol_attr=1e-4))
    assert not res.consistent
    assert ("diminishing", "uniform-fibred") in res.broken
    assert not res.by_id()["chain"].passed


def test_chain_is_reproducible():
    S = V.random_affine_instance(3)
    a = [r.line() for r in V.run_implication_chain(S, seed=5).reports]
    b = [r.line() for r in V.run_implication_chain(V.random_affine_instance(3), seed=5).reports]
    assert a == b


def test_random_affine_instance_norms():
    for seed in range(20):
        S = V.random_affine_instance(seed, norm_max=0.7)
        assert len(S.maps) in (2, 3) and S.dimension == 2
        assert all(np.linalg.norm(f.matrix, 2) <= 0.7 + 1e-12 for f in S.maps)
        assert all(f.witness == S.maps[0].witness for f in S.maps)
    loose = V.random_affine_instance(0, norm_max=1.2)
    assert all(f.witness is None for f in loose.maps)


def test_reports_pass_iff_within_tolerance(cantor_attr):
    reps = [V.check_union_inequality(20), V.check_equivariance(CANTOR, V.sample_addresses(A2)),
            V.check_fixed_points(CANTOR, 3), V.check_periodic_density(CANTOR, [2, 4], cantor_attr, threshold=0.05)]
    for r in reps:
        assert r.passed == (r.residual <= r.tolerance)


def test_hunt_converse_candidates_returns_leads_only():
    instances = [V.random_affine_instance(s, norm_max=1.1, tol_attr=5e-2, max_iter=60) for s in range(3)]
    hits = V.hunt_converse_candidates(instances)
    for k, res in hits:
        rep = res.by_id()
        assert rep["local-fibred"].passed and not rep["diminishing"].passed


def test_letter_table_and_prefix_images_match_naive():
    S = V.random_affine_instance(7)
    addrs = V.sample_addresses(S.alphabet)
    table = V._letter_table(addrs, 30)
    assert all(table[k, j] == a.letter(j) for k, a in enumerate(addrs) for j in range(30))
    P = np.array([[0.3, -0.2], [1.0, 2.0]])
    for n, X in V._prefix_images(S, P, table, [1, 5, 17]):
        for k, a in enumerate(addrs[:10]):
            assert np.allclose(X[k], eval_word(S.maps, prefix(a, n), P), atol=1e-13)


def test_point_fibred_extension_runs_until_below_threshold():
    B = PointCloud([[0.0], [1.0]])
    addrs = V.sample_addresses(A2)
    short = V.check_point_fibred(CANTOR, B, range(1, 6), addrs, threshold=1e-6)
    assert not short.passed
    longer = V.check_point_fibred(CANTOR, B, range(1, 6), addrs, threshold=1e-6, extend_to=40)
    assert longer.passed
    prof = longer.details["profile"]
    assert len(prof) == 13 and prof[-1] < 1e-6 <= prof[-2]  # 3^-13 is the first value below 1e-6
    assert longer.params["depths"] == list(range(1, 14))


def test_density_without_attractor_reports_infinite_residual():
    S = identity_instance()
    rep = V.check_periodic_density(S, [2, 4], attractor(S))
    assert not rep.passed and rep.residual == math.inf
    assert rep.witness["reason"] == "attractor not converged"
