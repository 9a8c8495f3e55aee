"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` (the lines are printed even
without ``-s``). Every criterion is checked at its stated tolerance and
wall-clock budget; nothing is loosened to make it pass.
"""
import math
import os
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from ifslab import verifier as V
from ifslab.codespace import Word, enumerate_words_upto, parse_address, periodicize
from ifslab.contractions import affine_fixed_point, compose_affine, phi_iterate
from ifslab.ifscore import attractor, chaos_game, coding_map, diminishing_certificate, word_fixed_point
from ifslab.metricsets import PointCloud, hausdorff, within_dilation

from oracles import cantor_depth_oracle, cantor_instance, dilation_infimum, hausdorff_loops, identity_instance, sierpinski_instance

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(capsys, number, title, checks, elapsed, budget):
    """Print the criterion's line and fail the test if any sub-check or the time budget failed."""
    timing = elapsed < budget if budget is not None else True
    passed = all(ok for ok, _ in checks.values()) and timing
    detail = "; ".join(f"{name}: {msg}" for name, (ok, msg) in checks.items())
    clock = f"{elapsed:.2f}s" + (f" < {budget:g}s" if budget is not None else "")
    with capsys.disabled():
        print(f"\nACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}  {title}  [{clock}]  {detail}")
    bad = [name for name, (ok, _) in checks.items() if not ok]
    assert not bad, f"criterion {number}: failed {bad}: {detail}"
    assert timing, f"criterion {number}: {elapsed:.2f}s exceeds {budget}s"


def check(ok, msg):
    return bool(ok), msg


# 1 ---------------------------------------------------------------------------

def test_1_hausdorff_metric_axioms(capsys):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    sym = tri = ulp_gap = 0.0
    for _ in range(500):
        A, B, C = (PointCloud(rng.normal(size=(int(rng.integers(1, 21)), 2))) for _ in range(3))
        ab, ba = hausdorff(A, B), hausdorff(B, A)
        bc, ac = hausdorff(B, C), hausdorff(A, C)
        sym = max(sym, abs(ab - ba))
        tri = max(tri, ac - (ab + bc))
        eps = dilation_infimum(A, B, within_dilation)
        ulp_gap = max(ulp_gap, abs(eps - ab) / math.ulp(ab))
    elapsed = time.perf_counter() - t0
    # the vectorized kernel must agree with a plain double loop on a few of the same clouds
    spot = max(abs(hausdorff(A, B) - hausdorff_loops(A.points, B.points)) for A, B in
               [(PointCloud(rng.normal(size=(20, 2))), PointCloud(rng.normal(size=(17, 2)))) for _ in range(20)])
    report(capsys, 1, "Hausdorff metric axioms on 500 random triples", {
        "symmetry": check(sym <= 1e-12, f"max |H(A,B)-H(B,A)| = {sym:.3g}"),
        "triangle": check(tri <= 1e-12, f"max H(A,C)-H(A,B)-H(B,C) = {tri:.3g}"),
        "bisection": check(ulp_gap <= 1, f"max gap = {ulp_gap:g} ulp"),
        "loop oracle": check(spot <= 1e-12, f"{spot:.3g}"),
    }, elapsed, 5)


# 2 ---------------------------------------------------------------------------

def test_2_union_inequality(capsys):
    t0 = time.perf_counter()
    rep = V.check_union_inequality(trials=100)
    elapsed = time.perf_counter() - t0
    report(capsys, 2, "union inequality over 100 random families", {
        "residual": check(rep.passed and rep.residual <= 1e-12 and rep.params["trials"] == 100,
                          f"max lhs-rhs = {rep.residual:.3g}"),
    }, elapsed, 1)


# 3 ---------------------------------------------------------------------------

def test_3_cantor_attractor_and_coding(capsys):
    S = cantor_instance()
    t0 = time.perf_counter()
    res = attractor(S, PointCloud([[0.0]]))
    h = hausdorff(res.cloud, PointCloud(cantor_depth_oracle(10)))
    ends = [float(coding_map(S, parse_address(s, S.alphabet))[0]) for s in ("|0", "|1")]
    fixed = {}
    for text, exact in (((0, 1), Fraction(1, 4)), ((1, 0), Fraction(3, 4))):
        w = Word(text, S.alphabet)
        closed = float(affine_fixed_point(compose_affine(S.maps, w))[0])
        fixed[text] = (float(word_fixed_point(S, w)[0]), closed, float(exact))
    elapsed = time.perf_counter() - t0
    bound = S.tol_attr + 3.0**-10
    report(capsys, 3, "Cantor attractor, coding map and word fixed points", {
        "converged": check(res.converged, f"{res.iterations} iterations"),
        "attractor": check(h <= bound, f"H to depth-10 oracle = {h:.3g} <= {bound:.3g}"),
        "pi(|0)=0, pi(|1)=1": check(abs(ends[0]) <= 1e-9 and abs(ends[1] - 1) <= 1e-9, f"{ends}"),
        "fixed points": check(all(abs(x - c) <= 1e-9 and abs(c - e) <= 1e-9 for x, c, e in fixed.values()),
                              ", ".join(f"{''.join(map(str, w))}->{v[0]!r}" for w, v in fixed.items())),
    }, elapsed, 5)


# 4 ---------------------------------------------------------------------------

def test_4_diminishing_certificate(capsys):
    S, I = cantor_instance(), identity_instance()
    B = PointCloud([[0.0], [1.0]])
    t0 = time.perf_counter()
    cert = diminishing_certificate(S, B, 10)
    ident = diminishing_certificate(I, B, 10)
    elapsed = time.perf_counter() - t0
    exact = [3.0**-n for n in range(1, 11)]
    gap = max(abs(d - e) for d, e in zip(cert.max_diams, exact))
    phi = S.maps[0].witness
    bounds = [phi_iterate(phi, 1.0, n) for n in range(1, 11)]
    over = max(d - b for d, b in zip(cert.max_diams, bounds))
    report(capsys, 4, "diameter-diminishing certificate", {
        "depths": check(cert.depths == list(range(1, 11)), f"{cert.depths[0]}..{cert.depths[-1]}"),
        "3^-n": check(gap <= 1e-12, f"max |d_n - 3^-n| = {gap:.3g}"),
        # phi^n(1) = 3^-n is attained exactly, so float evaluation can overshoot it by an ulp;
        # the criterion's 1e-12 tolerance governs this comparison as well
        "phi bound": check(over <= 1e-12 and cert.phi_bounds == bounds, f"max d_n - phi^n(1) = {over:.3g}"),
        "identity": check(ident.max_diams == [1.0] * 10 and not ident.verdict,
                          f"diams {sorted(set(ident.max_diams))}, verdict {ident.verdict}"),
    }, elapsed, 2)


# 5 ---------------------------------------------------------------------------

def test_5_equivariance(capsys):
    t0 = time.perf_counter()
    reps = {}
    for name, S in (("cantor", cantor_instance()), ("sierpinski", sierpinski_instance())):
        addrs = V.random_addresses(S.alphabet, 20, seed=5)
        reps[name] = (V.check_equivariance(S, addrs), 10 * S.tol_point, len(addrs))
    elapsed = time.perf_counter() - t0
    report(capsys, 5, "coding map equivariance f_i(pi(a)) = pi(ia)", {
        name: check(r.passed and r.residual <= tol and n == 20, f"{n} addresses, residual {r.residual:.3g} <= {tol:g}")
        for name, (r, tol, n) in reps.items()
    }, elapsed, 2)


# 6 ---------------------------------------------------------------------------

def test_6_fixed_points_are_periodic_codes(capsys):
    t0 = time.perf_counter()
    out = {}
    for name, S in (("cantor", cantor_instance()), ("sierpinski", sierpinski_instance())):
        words = enumerate_words_upto(S.alphabet, 4)
        worst = max(float(np.linalg.norm(word_fixed_point(S, w) - coding_map(S, periodicize(w)))) for w in words)
        rep = V.check_fixed_points(S, 4)
        out[name] = (worst, rep, len(words), 10 * S.tol_point)
    elapsed = time.perf_counter() - t0
    report(capsys, 6, "word fixed points equal pi of the periodic address", {
        name: check(worst <= tol and rep.passed and rep.params["words"] == n,
                    f"{n} words, worst {worst:.3g} <= {tol:g}")
        for name, (worst, rep, n, tol) in out.items()
    }, elapsed, 5)


# 7 ---------------------------------------------------------------------------

def test_7_periodic_points_dense(capsys):
    S = cantor_instance()
    t0 = time.perf_counter()
    res = attractor(S)
    prof = V.density_profile(S, [2, 4, 6, 8], res.cloud)
    elapsed = time.perf_counter() - t0
    # the cloud stands in for A_S up to the Cauchy stop plus the dedup grid
    resolution = S.tol_attr + S.dedup
    bound = 3.0**-8 + resolution
    report(capsys, 7, "periodic points are dense in the Cantor attractor", {
        "converged": check(res.converged, f"{len(res.cloud)} points"),
        "decreasing": check(all(b < a for a, b in zip(prof, prof[1:])), " > ".join(f"{e:.3g}" for e in prof)),
        "e_8": check(prof[-1] <= bound, f"{prof[-1]:.3g} <= 3^-8 + {resolution:.3g}"),
    }, elapsed, 10)


# 8 ---------------------------------------------------------------------------

def test_8_implication_chain_consistency(capsys):
    t0 = time.perf_counter()
    shapes, broken, verdicts = set(), [], {}
    for seed in range(50):
        S = V.random_affine_instance(seed)
        shapes.add((S.dimension, len(S.maps), bool(max(np.linalg.norm(f.matrix, 2) for f in S.maps) <= 0.7 + 1e-12)))
        res = V.run_implication_chain(S, seed=seed)
        if not res.consistent:
            broken.append((seed, res.broken))
        for r in res.reports:
            verdicts[r.check_id] = verdicts.get(r.check_id, 0) + r.passed
    elapsed = time.perf_counter() - t0
    report(capsys, 8, "implication chain on 50 random affine systems", {
        "instances": check(all(m == 2 and k in (2, 3) and ok for m, k, ok in shapes), f"{sorted(shapes)}"),
        "inconsistencies": check(not broken, f"{len(broken)} {broken[:3]}"),
        "pass counts": check(True, ", ".join(f"{k}={v}" for k, v in verdicts.items())),
    }, elapsed, 60)


# 9 ---------------------------------------------------------------------------

def test_9_chaos_game_matches_deterministic(capsys):
    t0 = time.perf_counter()
    out = {}
    for name, S in (("cantor", cantor_instance()), ("sierpinski", sierpinski_instance())):
        det = attractor(S)
        chaos = chaos_game(S, 100_000, burn_in=100, rng_seed=9)
        out[name] = (det.converged, hausdorff(chaos, det.cloud), 10 * S.tol_attr)
    elapsed = time.perf_counter() - t0
    report(capsys, 9, "chaos game (1e5 steps) against the deterministic attractor", {
        name: check(conv and h <= tol, f"H = {h:.3g} <= {tol:g}") for name, (conv, h, tol) in out.items()
    }, elapsed, 5)


# 10 --------------------------------------------------------------------------

def _cli(args, cwd, hash_seed):
    env = dict(os.environ, PYTHONHASHSEED=str(hash_seed), IFSLAB_SEED="11")
    proc = subprocess.run([sys.executable, "-m", "ifslab.cli", *args], cwd=cwd, env=env, capture_output=True)
    files = {p.name: p.read_bytes() for p in sorted(Path(cwd).iterdir()) if p.suffix in (".csv", ".pgm")}
    return proc.returncode, proc.stdout, proc.stderr, files


def test_10_cli_deterministic(capsys, tmp_path):
    cantor, sier = str(CONFIGS / "cantor.yaml"), str(CONFIGS / "sierpinski.yaml")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("0,0\n1,0\n0.5,2\n")
    b.write_text("0.1,0\n1,0.3\n")
    commands = {
        "attractor": ["attractor", sier, "-o", "s.csv"],
        "address": ["address", cantor, "0.1|1.0.0"],
        "fixpoint": ["fixpoint", sier, "0.1.2"],
        "verify": ["verify", cantor],
        "hausdorff": ["hausdorff", str(a), str(b)],
        "render": ["render", sier, "-o", "s.pgm", "--steps", "200000"],
        "certificate": ["certificate", sier],
        "explore": ["explore", "--instances", "2"],
    }
    t0 = time.perf_counter()
    checks = {}
    for name, args in commands.items():
        runs = []
        for k, hash_seed in enumerate((0, 12345)):
            cwd = tmp_path / f"{name}-{k}"
            cwd.mkdir()
            runs.append(_cli(args, cwd, hash_seed))
        same = runs[0] == runs[1]
        code = runs[0][0]
        produced = len(runs[0][1]) + sum(len(v) for v in runs[0][3].values())
        checks[name] = check(same and code == 0 and produced > 0, f"exit {code}, {produced} bytes, identical={same}")
    elapsed = time.perf_counter() - t0
    report(capsys, 10, "every CLI command is byte-identical across two runs", checks, elapsed, None)
