"""Executable property checks for an IFS, each producing a :class:`CheckReport`.

The checks assert finite-depth inequalities (nestedness, continuity moduli,
the phi-iterate bound); limit statements are rendered as "non-increasing and
below a threshold at the last depth".
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .codespace import (
    AddressSpec,
    Alphabet,
    Word,
    enumerate_words,
    enumerate_words_upto,
    periodicize,
    prefix,
    prepend,
    shift_insert,
)
from .contractions import (
    DEFAULT_CHECK_SEED,
    ComparisonFunction,
    ContractionMap,
    check_phi_contractive,
    eval_map,
    eval_word,
)
from .ifscore import (
    AttractorResult,
    ConvergenceError,
    IfsInstance,
    _reduce_for_diameter,
    attractor,
    coding_map,
    diminishing_certificate,
    fractal_operator,
    invariant_superset,
    word_fixed_point,
)
from .metricsets import PointCloud, as_cloud, diameter, directed_hausdorff, hausdorff

UNION_TOL = 1e-12
MONOTONE_TOL = 1e-12


@dataclass
class CheckReport:
    check_id: str
    passed: bool
    residual: float
    tolerance: float
    witness: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        witness = json.dumps(self.witness, sort_keys=True, default=_jsonable)
        params = json.dumps(self.params, sort_keys=True, default=_jsonable)
        return (f"CHECK {self.check_id} {status} residual={self.residual!r} tol={self.tolerance!r} "
                f"witness={witness} params={params}")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj.ravel()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (Word, AddressSpec)):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _pt(x) -> list[float]:
    return [float(v) for v in np.asarray(x).ravel()]


# -- address sampling --------------------------------------------------------

def sample_addresses(alphabet: Alphabet, seed: int = DEFAULT_CHECK_SEED, max_period: int = 4,
                     n_random: int = 32) -> list[AddressSpec]:
    """All purely periodic addresses with period length <= max_period, then
    ``n_random`` seeded eventually periodic ones. Duplicates are dropped."""
    out: list[AddressSpec] = []
    seen = set()
    for n in range(1, max_period + 1):
        for w in enumerate_words(alphabet, n):
            a = periodicize(w)
            if a not in seen:
                seen.add(a)
                out.append(a)
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        pre = tuple(int(v) for v in rng.integers(0, alphabet.size, size=rng.integers(0, 4)))
        per = tuple(int(v) for v in rng.integers(0, alphabet.size, size=rng.integers(1, 4)))
        a = AddressSpec.of(alphabet, pre, per)
        if a not in seen:
            seen.add(a)
            out.append(a)
    return out


def random_addresses(alphabet: Alphabet, count: int, seed: int) -> list[AddressSpec]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        pre = tuple(int(v) for v in rng.integers(0, alphabet.size, size=rng.integers(0, 5)))
        per = tuple(int(v) for v in rng.integers(0, alphabet.size, size=rng.integers(1, 5)))
        out.append(AddressSpec.of(alphabet, pre, per))
    return out


# -- union inequality --------------------------------------------------------

def check_union_inequality(trials: int = 100, family_size: int = 3, cloud_size: int = 5,
                           rng_seed: int = DEFAULT_CHECK_SEED, dim: int = 2) -> CheckReport:
    """H(U H_i, U K_i) <= max_i H(H_i, K_i) on random finite families."""
    if min(trials, family_size, cloud_size) < 1:
        raise ValueError("counts must be positive")
    rng = np.random.default_rng(rng_seed)
    worst, witness = -math.inf, {}
    for t in range(trials):
        Hs = [rng.normal(size=(rng.integers(1, cloud_size + 1), dim)) for _ in range(family_size)]
        Ks = [rng.normal(size=(rng.integers(1, cloud_size + 1), dim)) for _ in range(family_size)]
        lhs = hausdorff(np.vstack(Hs), np.vstack(Ks))
        rhs = max(hausdorff(h, k) for h, k in zip(Hs, Ks))
        if lhs - rhs > worst:
            worst = lhs - rhs
            witness = {"trial": t, "lhs": lhs, "rhs": rhs,
                       "H": [h.tolist() for h in Hs], "K": [k.tolist() for k in Ks]}
    return CheckReport("union-inequality", worst <= UNION_TOL, float(worst), UNION_TOL, witness,
                       {"trials": trials, "family_size": family_size, "cloud_size": cloud_size,
                        "seed": rng_seed, "dim": dim})


# -- coding map checks -------------------------------------------------------

def check_equivariance(S: IfsInstance, addresses: Sequence[AddressSpec]) -> CheckReport:
    """f_i(pi(a)) against pi(i a) for every letter i and listed address a."""
    tol = 10 * S.tol_point
    worst, witness = 0.0, {}
    for a in addresses:
        pa = coding_map(S, a)
        for i, f in enumerate(S.maps):
            lhs = eval_map(f, pa)
            rhs = coding_map(S, shift_insert(i, a))
            r = float(np.linalg.norm(lhs - rhs))
            if r > worst or not witness:
                worst = max(worst, r)
                witness = {"letter": i, "address": str(a), "lhs": _pt(lhs), "rhs": _pt(rhs)}
    return CheckReport("equivariance", worst <= tol, worst, tol, witness, {"addresses": len(addresses)})


def _letter_table(addresses: Sequence[AddressSpec], n: int) -> np.ndarray:
    """Row k holds the first n letters of addresses[k]."""
    out = np.empty((len(addresses), n), dtype=int)
    for k, a in enumerate(addresses):
        pre = np.array(a.preperiod.letters, dtype=int)[:n]
        out[k, :len(pre)] = pre
        out[k, len(pre):] = np.resize(np.array(a.period.letters, dtype=int), n - len(pre))
    return out


def _prefix_images(S: IfsInstance, P: np.ndarray, letters: np.ndarray, depths: Sequence[int]):
    """Yield (n, X) with X[k] = f_{[a_k]_n}(P) for each n in ``depths``."""
    n_addr = letters.shape[0]
    if S.all_affine:
        # prefix maps compose outward-in: f_{[a]_n} = f_{[a]_{n-1}} o f_{a_n}
        Ls = np.stack([f.matrix for f in S.maps])
        bs = np.stack([f.offset for f in S.maps])
        L = np.broadcast_to(np.eye(S.dimension), (n_addr, S.dimension, S.dimension)).copy()
        b = np.zeros((n_addr, S.dimension))
        wanted = set(depths)
        for n in range(1, max(depths) + 1):
            idx = letters[:, n - 1]
            b = np.einsum("kij,kj->ki", L, bs[idx]) + b
            L = L @ Ls[idx]
            if n in wanted:
                yield n, np.einsum("kij,pj->kpi", L, P) + b[:, None, :]
        return
    for n in depths:
        X = np.broadcast_to(P, (n_addr,) + P.shape).copy()
        for j in range(n - 1, -1, -1):
            for i, f in enumerate(S.maps):
                sel = letters[:, j] == i
                if sel.any():
                    X[sel] = eval_map(f, X[sel])
        yield n, X


def point_fibred_profile(S: IfsInstance, B, depths: Sequence[int], addresses: Sequence[AddressSpec],
                         stop_below: float | None = None):
    """s_n = max over addresses a and x in B of d(f_{[a]_n}(x), pi(a)), per depth n.

    Also returns, per depth, the (address, point) pair attaining s_n. With
    ``stop_below`` the profile ends at the first depth whose value is below it.
    """
    B = as_cloud(B)
    targets = np.array([coding_map(S, a) for a in addresses])
    top = max(depths)
    letters = _letter_table(addresses, top)
    profile, argmax = [], []
    for n, X in _prefix_images(S, B.points, letters, depths):
        d = np.linalg.norm(X - targets[:, None, :], axis=2)
        ai, xi = np.unravel_index(int(np.argmax(d)), d.shape)
        profile.append(float(d[ai, xi]))
        argmax.append((addresses[ai], B.points[xi]))
        if stop_below is not None and profile[-1] < stop_below:
            break
    return profile, argmax


def _non_increasing(seq, tol=MONOTONE_TOL):
    for k, (a, b) in enumerate(zip(seq, seq[1:])):
        if b > a + tol:
            return k + 1, b - a
    return None, 0.0


def check_point_fibred(S: IfsInstance, B, depths: Sequence[int], addresses: Sequence[AddressSpec],
                       threshold: float | None = None, check_id: str = "point-fibred",
                       extend_to: int | None = None) -> CheckReport:
    """Uniform convergence of prefix compositions to the coding map over B.

    Passes iff the profile s_n is non-increasing (to 1e-12) and its last
    value is below ``threshold`` (default tol_attr). The residual is the last
    s_n, or +inf when the profile increases somewhere. With ``extend_to``
    the depths continue one at a time past the last listed one until s_n
    drops below the threshold or depth ``extend_to`` is reached.
    """
    depths = list(depths)
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise ValueError("depths must be increasing")
    thr = S.tol_attr if threshold is None else threshold
    prof, arg = point_fibred_profile(S, B, depths, addresses)
    if extend_to is not None and extend_to > depths[-1] and prof[-1] >= thr and _non_increasing(prof)[0] is None:
        more = list(range(depths[-1] + 1, extend_to + 1))
        p2, a2 = point_fibred_profile(S, B, more, addresses, stop_below=thr)
        prof, arg = prof + p2, arg + a2
        depths = depths + more[:len(p2)]
    bad, jump = _non_increasing(prof)
    final = prof[-1]
    if bad is None:
        residual = final
        k = len(prof) - 1
    else:
        residual = math.inf
        k = bad
    a, x = arg[k]
    witness = {"depth": depths[k], "address": str(a), "point": _pt(x), "value": prof[k]}
    if bad is not None:
        witness["increase"] = jump
    passed = bad is None and final < thr
    return CheckReport(check_id, passed, residual, thr, witness,
                       {"depths": _depth_summary(depths), "addresses": len(addresses),
                        "cloud_size": len(as_cloud(B))},
                       {"profile": prof})


def _depth_summary(depths: list[int]):
    if len(depths) > 16 and depths == list(range(depths[0], depths[-1] + 1)):
        return f"{depths[0]}..{depths[-1]}"
    return depths


def check_fixed_points(S: IfsInstance, max_word_len: int) -> CheckReport:
    """Fixed point of f_w against the coding map at the periodic address of w."""
    tol = 10 * S.tol_point
    worst, witness = 0.0, {}
    words = enumerate_words_upto(S.alphabet, max_word_len, S.word_cap)
    for w in words:
        fp = word_fixed_point(S, w)
        pw = coding_map(S, periodicize(w))
        r = float(np.linalg.norm(fp - pw))
        if r > worst or not witness:
            worst = max(worst, r)
            witness = {"word": str(w), "fixed_point": _pt(fp), "coding_map": _pt(pw)}
    return CheckReport("fixed-points", worst <= tol, worst, tol, witness,
                       {"max_word_len": max_word_len, "words": len(words)})


def density_profile(S: IfsInstance, word_lens: Sequence[int], cloud) -> list[float]:
    """e_L = max over cloud points of the distance to the fixed points of words of length <= L."""
    cloud = as_cloud(cloud)
    out = []
    pts: list[np.ndarray] = []
    done = 0
    for L in word_lens:
        for n in range(done + 1, L + 1):
            pts.extend(word_fixed_point(S, w) for w in enumerate_words(S.alphabet, n, S.word_cap))
        done = max(done, L)
        out.append(directed_hausdorff(cloud, PointCloud(np.array(pts))))
    return out


def check_periodic_density(S: IfsInstance, word_lens: Sequence[int], attr: AttractorResult | None = None,
                           threshold: float | None = None) -> CheckReport:
    """Periodic points fill the attractor cloud: e_L strictly decreasing, last e_L small.

    Default threshold is 10*tol_attr + dedup.
    """
    word_lens = list(word_lens)
    total = sum(S.alphabet.size**n for n in range(1, max(word_lens) + 1))
    if total > S.word_cap:
        from .codespace import EnumerationCapError
        raise EnumerationCapError(f"{total} periodic words exceeds cap {S.word_cap}")
    if attr is None:
        attr = attractor(S)
    thr = 10 * S.tol_attr + S.dedup if threshold is None else threshold
    prof = density_profile(S, word_lens, attr.cloud)
    single_point = len(attr.cloud) == 1 or all(e == 0.0 for e in prof)
    strictly = single_point or all(b < a for a, b in zip(prof, prof[1:]))
    residual = prof[-1] if strictly and attr.converged else math.inf
    passed = strictly and prof[-1] < thr and attr.converged
    witness = {"profile": prof} if attr.converged else {"profile": prof, "reason": "attractor not converged"}
    return CheckReport("periodic-density", passed, residual, thr, witness,
                       {"word_lens": word_lens, "cloud_size": len(attr.cloud), "converged": attr.converged})


def check_pi_continuity(S: IfsInstance, m_depths: Sequence[int], B=None, pairs_per_depth: int = 16,
                        rng_seed: int = DEFAULT_CHECK_SEED, M: PointCloud | None = None) -> CheckReport:
    """d(pi(a), pi(b)) <= diam f_beta(M_B) for addresses sharing exactly the prefix beta.

    ``M`` is the invariant superset; its finite cloud is extended by the
    exact coding-map images of the sampled tails, which all lie in A_S.
    """
    if M is None:
        M = invariant_superset(S, S.origin() if B is None else B)
    k = S.alphabet.size
    rng = np.random.default_rng(rng_seed)
    worst, witness = -math.inf, {}
    n_pairs = 0
    # hull vertices of M plus the two tails contain the hull vertices of their union
    hull = _reduce_for_diameter(S, M.points)
    for m in m_depths:
        if k < 2:
            continue
        for _ in range(pairs_per_depth):
            beta = Word(tuple(int(v) for v in rng.integers(0, k, size=m)), S.alphabet)
            i, j = (int(v) for v in rng.choice(k, size=2, replace=False))
            ta, tb = random_addresses(S.alphabet, 2, int(rng.integers(2**31)))
            a = prepend(beta, shift_insert(i, ta))
            b = prepend(beta, shift_insert(j, tb))
            tails = np.array([coding_map(S, a.shift(m)), coding_map(S, b.shift(m))])
            base = _reduce_for_diameter(S, np.vstack([hull, tails]))
            bound = diameter(PointCloud(eval_word(S.maps, beta, base)))
            d = float(np.linalg.norm(coding_map(S, a) - coding_map(S, b)))
            n_pairs += 1
            if d - bound > worst:
                worst = d - bound
                witness = {"a": str(a), "b": str(b), "prefix_len": m, "distance": d, "bound": bound}
    if n_pairs == 0:
        worst = 0.0
    return CheckReport("pi-continuity", worst <= UNION_TOL, float(worst), UNION_TOL, witness,
                       {"m_depths": list(m_depths), "pairs_per_depth": pairs_per_depth, "seed": rng_seed})


def check_nestedness(S: IfsInstance, M, addresses: Sequence[AddressSpec], depths=range(1, 13),
                     threshold: float | None = None) -> CheckReport:
    """diam f_{[a]_n}(M) is non-increasing in n for forward-invariant M and ends
    at or below ``threshold`` (default tol_attr)."""
    thr = S.tol_attr if threshold is None else threshold
    M = as_cloud(M)
    base = _reduce_for_diameter(S, M.points)
    worst_final, witness, bad = 0.0, {}, None
    for a in addresses:
        diams = [diameter(PointCloud(eval_word(S.maps, prefix(a, n), base))) for n in depths]
        idx, jump = _non_increasing(diams)
        if idx is not None and bad is None:
            bad = {"address": str(a), "depth": list(depths)[idx], "increase": jump}
        if diams[-1] >= worst_final:
            worst_final = diams[-1]
            witness = {"address": str(a), "diams": diams}
    if bad:
        witness["non_monotone"] = bad
    residual = worst_final if bad is None else math.inf
    return CheckReport("nestedness", residual <= thr, residual, thr, witness,
                       {"depths": list(depths), "addresses": len(addresses)})


# -- implication chain -------------------------------------------------------

CHAIN_STEPS = ("phi-contractive", "diminishing", "uniform-fibred", "local-fibred", "attractor-coding")
# antecedent -> consequents, in the order the chain is reported
IMPLICATIONS = (
    ("phi-contractive", "diminishing"),
    ("diminishing", "uniform-fibred"),
    ("uniform-fibred", "local-fibred"),
    ("diminishing", "attractor-coding"),
    ("attractor-coding", "local-fibred"),
)


@dataclass
class ChainResult:
    reports: list[CheckReport]
    consistent: bool
    broken: list[tuple[str, str]]

    def by_id(self) -> dict[str, CheckReport]:
        return {r.check_id: r for r in self.reports}


def _box(cloud: PointCloud, pad: float):
    lo, hi = cloud.bounding_box()
    span = np.maximum(hi - lo, 1.0)
    return lo - pad * span, hi + pad * span


def chain_test_sets(S: IfsInstance, attr: AttractorResult, seed: int) -> tuple[list[PointCloud], list[PointCloud]]:
    """Bounded sets for the uniform check and small balls for the local one."""
    m = S.dimension
    rng = np.random.default_rng(seed)
    lo, hi = _box(attr.cloud, 0.5)
    corners = np.array([[hi[j] if (c >> j) & 1 else lo[j] for j in range(m)] for c in range(2**m)])
    uniform = [S.origin(), PointCloud(corners), PointCloud(lo + (hi - lo) * rng.random((8, m)))]
    span = float(np.max(hi - lo))
    eta = 1e-3 * span
    centres = [np.zeros(m), attr.cloud.points[0], attr.cloud.points[len(attr.cloud) // 2], hi + 0.25 * (hi - lo)]
    offsets = np.vstack([np.zeros(m), eta * np.eye(m), -eta * np.eye(m)])
    balls = [PointCloud(c + offsets) for c in centres]
    return uniform, balls


def _chain_depth(S: IfsInstance, M: PointCloud, budget: int) -> int:
    k = len(S.maps)
    n_pts = len(_reduce_for_diameter(S, M.points))
    n = 1
    while k ** (n + 1) <= S.word_cap and k ** (n + 1) * n_pts <= budget:
        n += 1
    return n


def _fail(check_id: str, reason: str, params=None) -> CheckReport:
    return CheckReport(check_id, False, math.inf, 0.0, {"reason": reason}, params or {})


def run_implication_chain(S: IfsInstance, seed: int = DEFAULT_CHECK_SEED, samples: int = 10_000,
                          point_budget: int = 1 << 20, addresses: Sequence[AddressSpec] | None = None,
                          superset_steps: int = 30) -> ChainResult:
    """Run the five characterisations in order and test the implications between them.

    Every limit-type verdict uses the same resolution ``tol_attr`` and the
    same word depth, so each implication holds for the finite checks too.
    """
    addresses = list(addresses) if addresses is not None else sample_addresses(S.alphabet, seed)
    reports: dict[str, CheckReport] = {}
    attr = attractor(S)
    eps = S.tol_attr

    # phi-contractivity, sampled over a box around the attractor cloud
    if all(f.witness is not None for f in S.maps):
        region = _box(attr.cloud, 0.5)
        worst, witness, ok = -math.inf, {}, True
        for i, f in enumerate(S.maps):
            rep = check_phi_contractive(f, f.witness, samples, region, seed + i)
            if rep.worst_excess > worst:
                worst = rep.worst_excess
                witness = {"map": i}
            if rep.violations:
                ok = False
                x, y, lhs, rhs = rep.violations[0]
                witness = {"map": i, "x": _pt(x), "y": _pt(y), "image_distance": lhs, "phi": rhs}
        reports["phi-contractive"] = CheckReport("phi-contractive", ok, float(worst), 1e-12, witness,
                                                 {"samples": samples, "seed": seed})
    else:
        reports["phi-contractive"] = _fail("phi-contractive", "no comparison-function witness on every map")

    uniform, balls = chain_test_sets(S, attr, seed)
    M, reason = None, "attractor not converged"
    if attr.converged:
        try:
            M = invariant_superset(S, PointCloud(np.vstack([b.points for b in uniform + balls])),
                                   superset_steps, attr)
            # exact attractor points: every tail of every sampled address
            tails = [coding_map(S, a.shift(j)) for a in addresses
                     for j in range(len(a.preperiod) + len(a.period))]
            M = M.union(PointCloud(np.array(tails)))
        except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
            M, reason = None, str(exc)

    depth, resolution = 0, eps
    if M is None:
        for cid in ("diminishing", "uniform-fibred", "local-fibred"):
            reports[cid] = _fail(cid, reason)
    else:
        depth = _chain_depth(S, M, point_budget)
        base = diameter(M)
        witnesses = [f.witness for f in S.maps]
        if all(w is not None for w in witnesses):
            resolution = max(eps, envelope_iterate(witnesses, base, depth))
        cert = diminishing_certificate(S, M, depth, threshold=resolution * (1 + 1e-9) + 1e-12)
        witness = {"max_diams": cert.max_diams}
        if cert.phi_bounds is not None:
            witness["phi_bounds"] = cert.phi_bounds
        reports["diminishing"] = CheckReport("diminishing", cert.verdict, cert.max_diams[-1], cert.threshold,
                                             witness, {"depth": depth, "superset_size": len(M),
                                                       "superset_diameter": base})
        depths = list(range(1, depth + 1))
        thr = resolution * (1 + 1e-9) + 2e-12
        reports["uniform-fibred"] = _fibred_family("uniform-fibred", S, uniform, depths, addresses, thr)
        reports["local-fibred"] = _fibred_family("local-fibred", S, balls, depths, addresses, thr)

    reports["attractor-coding"] = _attractor_coding(S, attr, addresses)
    ordered = [reports[c] for c in CHAIN_STEPS]
    broken = [(a, b) for a, b in IMPLICATIONS if reports[a].passed and not reports[b].passed]
    summary = CheckReport("chain", not broken, float(len(broken)), 0.0,
                          {"broken": [f"{a}->{b}" for a, b in broken],
                           "verdicts": {r.check_id: r.passed for r in ordered}},
                          {"seed": seed, "depth": depth, "resolution": resolution})
    return ChainResult(ordered + [summary], not broken, broken)


def envelope_iterate(witnesses, t: float, n: int) -> float:
    """n-fold iterate of the pointwise maximum of several comparison functions."""
    from .contractions import phi_eval

    for _ in range(n):
        t = max(float(phi_eval(w, t)) for w in witnesses)
    return t


FIBRED_EXTENSION = {True: 4096, False: 64}  # deepest fibred depth, affine vs. general maps


def _fibred_family(check_id, S, sets, depths, addresses, thr) -> CheckReport:
    # Profiles need no word enumeration, so they may run past the diminishing
    # depth; once that check passes s_n is already below thr and nothing changes.
    deepest = FIBRED_EXTENSION[S.all_affine]
    try:
        reps = [check_point_fibred(S, B, depths, addresses, thr, extend_to=deepest) for B in sets]
    except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(check_id, f"coding map unavailable: {exc}")
    return _worst_of(check_id, reps)


def _worst_of(check_id: str, reps: list[CheckReport]) -> CheckReport:
    worst = max(reps, key=lambda r: (not r.passed, r.residual))
    return CheckReport(check_id, all(r.passed for r in reps), worst.residual, worst.tolerance,
                       worst.witness, {**worst.params, "sets": len(reps)},
                       {"profiles": [r.details.get("profile") for r in reps]})


def _attractor_coding(S: IfsInstance, attr: AttractorResult, addresses) -> CheckReport:
    """Attractor exists, pi is equivariant, and pi maps onto the attractor cloud."""
    if not attr.converged:
        return _fail("attractor-coding", "attractor not converged", {"iterations": attr.iterations})
    try:
        eq = check_equivariance(S, addresses)
        images = PointCloud(np.array([coding_map(S, a) for a in addresses]))
        # pushing exact coding-map images forward keeps them coding-map images
        cover = images
        for _ in range(attr.iterations):
            cover = fractal_operator(S, cover)
    except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail("attractor-coding", f"coding map unavailable: {exc}")
    slack = 2 * S.tol_attr + 2 * S.dedup
    into = directed_hausdorff(images, attr.cloud)
    onto = directed_hausdorff(attr.cloud, cover)
    residual = max(into, onto)
    passed = eq.passed and residual <= slack
    return CheckReport("attractor-coding", passed, residual, slack,
                       {"equivariance_residual": eq.residual, "into": into, "onto": onto},
                       {"addresses": len(addresses), "iterations": attr.iterations})


def hunt_converse_candidates(instances, seed: int = DEFAULT_CHECK_SEED) -> list[tuple[int, ChainResult]]:
    """Instances whose local-fibred check passes while the diminishing check fails.

    Such systems are only candidates for separating the two notions; no
    conclusion is drawn from them.
    """
    hits = []
    for k, S in enumerate(instances):
        res = run_implication_chain(S, seed)
        rep = res.by_id()
        if rep["local-fibred"].passed and not rep["diminishing"].passed:
            hits.append((k, res))
    return hits


def random_affine_instance(seed: int, dim: int = 2, n_maps: int | None = None, norm_max: float = 0.7,
                           tol_attr: float = 2e-2, witness: bool = True, max_iter: int = 200) -> IfsInstance:
    """Random affine IFS whose linear parts have spectral norm at most ``norm_max``."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4)) if n_maps is None else n_maps
    maps = []
    for _ in range(k):
        U, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        W, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        s = rng.uniform(0.05, norm_max, dim)
        L = U @ np.diag(s) @ W
        w = ComparisonFunction.linear(norm_max) if witness and norm_max < 1 else None
        maps.append(ContractionMap.affine(L, rng.uniform(-0.5, 0.5, dim), w))
    return IfsInstance(tuple(maps), tol_attr=tol_attr, max_iter=max_iter)
