"""Command-line front end: ``ifslab <command> ...``.

Exit codes: 0 success, 1 a check or convergence failed, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import verifier as V
from .codespace import AlphabetError, EnumerationCapError, parse_address, parse_word
from .config import ConfigError, load_config
from .contractions import DEFAULT_CHECK_SEED
from .ifscore import ConvergenceError, IfsInstance, attractor, chaos_game, coding_map, diminishing_certificate, word_fixed_point
from .metricsets import PointCloud, format_cloud, hausdorff, read_cloud
from .raster import hit_counts, pgm_bytes, to_gray

OK, FAILED, USAGE = 0, 1, 2

STANDALONE_CHECKS = ("union-inequality", "equivariance", "point-fibred", "fixed-points",
                     "periodic-density", "pi-continuity")
CHAIN_CHECKS = V.CHAIN_STEPS + ("chain",)
ALL_CHECKS = STANDALONE_CHECKS + CHAIN_CHECKS


class UsageError(Exception):
    pass


def default_seed() -> int:
    env = os.environ.get("IFSLAB_SEED")
    if env is None:
        return DEFAULT_CHECK_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"IFSLAB_SEED must be an integer, got {env!r}") from None


def fmt_point(x) -> str:
    return ",".join(repr(float(v)) for v in np.asarray(x).ravel())


def _config(path):
    try:
        return load_config(path)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _seed_cloud(arg, cfg):
    if arg is None:
        return cfg.seed
    if arg == "origin":
        return cfg.instance.origin()
    try:
        cloud = read_cloud(arg)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if cloud.dimension != cfg.instance.dimension:
        raise UsageError(f"seed cloud has dimension {cloud.dimension}, IFS has {cfg.instance.dimension}")
    return cloud


def _with(S: IfsInstance, **changes) -> IfsInstance:
    fields = dict(tol_point=S.tol_point, tol_attr=S.tol_attr, max_depth=S.max_depth, dedup=S.dedup,
                  word_cap=S.word_cap, max_iter=S.max_iter, names=S.names)
    if "tol_attr" in changes and changes["tol_attr"] != S.tol_attr:
        fields["dedup"] = None
    fields.update(changes)
    return IfsInstance(S.maps, **fields)


# -- commands ----------------------------------------------------------------

def cmd_attractor(args) -> int:
    cfg = _config(args.config)
    S = cfg.instance
    changes = {}
    if args.tol is not None:
        changes["tol_attr"] = args.tol
    if args.max_iter is not None:
        changes["max_iter"] = args.max_iter
    if changes:
        S = _with(S, **changes)
    res = attractor(S, _seed_cloud(args.seed_cloud, cfg))
    comment = (f"iterations={res.iterations} final_step_hausdorff={res.final_step_hausdorff!r} "
               f"converged={str(res.converged).lower()}")
    text = format_cloud(res.cloud, comment)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(f"iterations {res.iterations}", file=sys.stderr if args.out == "-" else sys.stdout)
    print(f"final_step_hausdorff {res.final_step_hausdorff!r}", file=sys.stderr if args.out == "-" else sys.stdout)
    if not res.converged:
        sys.stdout.flush()
        print("not converged", file=sys.stderr)
        return FAILED
    return OK


def cmd_address(args) -> int:
    cfg = _config(args.config)
    S = cfg.instance
    try:
        a = parse_address(args.address, S.alphabet, cfg.names)
    except (AlphabetError, ValueError) as exc:
        raise UsageError(f"bad address {args.address!r}: {exc}") from None
    try:
        p = coding_map(S, a)
    except (ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"coding map failed: {exc}", file=sys.stderr)
        return FAILED
    print(fmt_point(p))
    return OK


def cmd_fixpoint(args) -> int:
    cfg = _config(args.config)
    S = cfg.instance
    try:
        w = parse_word(args.word, S.alphabet, cfg.names)
        if len(w) == 0:
            raise ValueError("word must be non-empty")
    except (AlphabetError, ValueError) as exc:
        raise UsageError(f"bad word {args.word!r}: {exc}") from None
    try:
        p = word_fixed_point(S, w)
    except (ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"fixed point failed: {exc}", file=sys.stderr)
        return FAILED
    print(fmt_point(p))
    return OK


def cmd_hausdorff(args) -> int:
    try:
        A, B = read_cloud(args.a), read_cloud(args.b)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if A.dimension != B.dimension:
        raise UsageError(f"clouds have dimensions {A.dimension} and {B.dimension}")
    print(repr(hausdorff(A, B)))
    return OK


def cmd_render(args) -> int:
    cfg = _config(args.config)
    S = cfg.instance
    if S.dimension != 2:
        raise UsageError(f"render needs a 2-D IFS, this one is {S.dimension}-D")
    if args.width < 1 or args.height < 1 or args.steps <= args.burn_in:
        raise UsageError("need positive raster size and steps > burn-in")
    seed = default_seed() if args.seed is None else args.seed
    cloud = chaos_game(S, args.steps, args.burn_in, seed)
    data = pgm_bytes(to_gray(hit_counts(cloud, args.width, args.height)))
    with open(args.out, "wb") as fh:
        fh.write(data)
    return OK


def _certificate_cloud(args, cfg):
    if args.cloud is not None:
        return _seed_cloud(args.cloud, cfg)
    res = attractor(cfg.instance, cfg.seed)
    if res.converged:
        lo, hi = res.cloud.bounding_box()
    else:
        # no attractor to frame: fall back to a unit box centred on the seed
        mid = cfg.seed.points.mean(axis=0)
        lo, hi = mid - 0.5, mid + 0.5
    m = cfg.instance.dimension
    corners = [[hi[j] if (c >> j) & 1 else lo[j] for j in range(m)] for c in range(2**m)]
    return PointCloud(corners)


def _certificate_depth(S: IfsInstance, budget: int = 1 << 18) -> int:
    """Deepest level whose word count stays within budget and the word cap."""
    n, k = 1, S.alphabet.size
    if k == 1:
        return 10
    while k ** (n + 1) <= min(budget, S.word_cap):
        n += 1
    return n


def cmd_certificate(args) -> int:
    cfg = _config(args.config)
    S = cfg.instance
    B = _certificate_cloud(args, cfg)
    depth = args.depth if args.depth is not None else _certificate_depth(S)
    try:
        cert = diminishing_certificate(S, B, depth, args.threshold)
    except EnumerationCapError as exc:
        raise UsageError(str(exc)) from None
    print("# depth max_diam phi_bound")
    for k, (n, d) in enumerate(zip(cert.depths, cert.max_diams)):
        bound = repr(cert.phi_bounds[k]) if cert.phi_bounds is not None else "-"
        print(f"{n} {d!r} {bound}")
    print(f"verdict {'PASS' if cert.verdict else 'FAIL'} threshold={cert.threshold!r}")
    return OK if cert.verdict else FAILED


def _density_lens(S: IfsInstance, depth: int, budget: int = 50_000) -> list[int]:
    lens, total = [], 0
    for L in range(1, depth + 1):
        total += S.alphabet.size**L
        if total > min(budget, S.word_cap):
            break
        if L % 2 == 0:
            lens.append(L)
    return lens or [1]


def run_checks(cfg, checks, depth: int, seed: int) -> list[V.CheckReport]:
    S = cfg.instance
    addresses = V.sample_addresses(S.alphabet, seed)
    attr = None
    reports = []

    def get_attr():
        nonlocal attr
        if attr is None:
            attr = attractor(S, cfg.seed)
        return attr

    for cid in checks:
        if cid in CHAIN_CHECKS:
            continue
        try:
            if cid == "union-inequality":
                rep = V.check_union_inequality(100, 3, 5, seed, S.dimension)
            elif cid == "equivariance":
                rep = V.check_equivariance(S, addresses)
            elif cid == "point-fibred":
                res = get_attr()
                lo, hi = res.cloud.bounding_box()
                m = S.dimension
                B = PointCloud([[hi[j] if (c >> j) & 1 else lo[j] for j in range(m)] for c in range(2**m)])
                rep = V.check_point_fibred(S, B, range(1, depth + 1), addresses)
            elif cid == "fixed-points":
                L = 1
                while L < 4 and sum(S.alphabet.size**n for n in range(1, L + 2)) <= S.word_cap:
                    L += 1
                rep = V.check_fixed_points(S, L)
            elif cid == "periodic-density":
                rep = V.check_periodic_density(S, _density_lens(S, depth), get_attr())
            elif cid == "pi-continuity":
                res = get_attr()
                M = V.invariant_superset(S, cfg.seed, 30, res) if res.converged else None
                if M is None:
                    rep = V._fail("pi-continuity", "attractor not converged")
                else:
                    rep = V.check_pi_continuity(S, range(0, min(depth, 8) + 1), rng_seed=seed, M=M)
        except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
            rep = V._fail(cid, str(exc))
        reports.append(rep)
    if any(c in CHAIN_CHECKS for c in checks):
        chain = V.run_implication_chain(S, seed=seed, addresses=addresses).by_id()
        reports.extend(chain[c] for c in checks if c in CHAIN_CHECKS)
    return reports


def cmd_verify(args) -> int:
    cfg = _config(args.config)
    if args.checks in (None, "all"):
        checks = list(ALL_CHECKS)
    else:
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = [c for c in checks if c not in ALL_CHECKS]
        if unknown or not checks:
            raise UsageError(f"unknown check ids {unknown}; choose from {', '.join(ALL_CHECKS)}")
    seed = default_seed() if args.seed is None else args.seed
    reports = run_checks(cfg, checks, args.depth, seed)
    for rep in reports:
        print(rep.line())
    return OK if all(r.passed for r in reports) else FAILED


def cmd_explore(args) -> int:
    """Search random affine systems for local-fibred-but-not-diminishing candidates."""
    seed = default_seed() if args.seed is None else args.seed
    instances = [V.random_affine_instance(seed + k, args.dimension, norm_max=args.norm_max,
                                        tol_attr=args.tol, max_iter=args.max_iter)
                 for k in range(args.instances)]
    hits = V.hunt_converse_candidates(instances, seed)
    print(f"# searched {len(instances)} instances; candidates are leads, not verdicts")
    for k, res in hits:
        rep = res.by_id()
        print(f"CANDIDATE instance_seed={seed + k} local-fibred={rep['local-fibred'].residual!r} "
              f"diminishing={rep['diminishing'].residual!r}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ifslab", description="Attractors, coding maps and checks for IFSs.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("attractor", help="deterministic attractor cloud as CSV")
    a.add_argument("config")
    a.add_argument("-o", "--out", default="-", help="output CSV ('-' for stdout)")
    a.add_argument("--tol", type=float, help="override tol_attr")
    a.add_argument("--max-iter", type=int)
    a.add_argument("--seed-cloud", help="CSV file or 'origin'; default is the config seed")
    a.set_defaults(func=cmd_attractor)

    a = sub.add_parser("address", help="coding-map image of an address 'pre|per'")
    a.add_argument("config")
    a.add_argument("address")
    a.set_defaults(func=cmd_address)

    a = sub.add_parser("fixpoint", help="fixed point of f_w for a word like 0.1")
    a.add_argument("config")
    a.add_argument("word")
    a.set_defaults(func=cmd_fixpoint)

    a = sub.add_parser("verify", help="run property checks")
    a.add_argument("config")
    a.add_argument("--checks", help=f"comma-separated ids or 'all': {', '.join(ALL_CHECKS)}")
    a.add_argument("--depth", type=int, default=16)
    a.add_argument("--seed", type=int)
    a.set_defaults(func=cmd_verify)

    a = sub.add_parser("hausdorff", help="Hausdorff distance between two CSV clouds")
    a.add_argument("a")
    a.add_argument("b")
    a.set_defaults(func=cmd_hausdorff)

    a = sub.add_parser("render", help="chaos-game raster of a 2-D attractor (binary PGM)")
    a.add_argument("config")
    a.add_argument("-o", "--out", required=True)
    a.add_argument("--width", type=int, default=512)
    a.add_argument("--height", type=int, default=512)
    a.add_argument("--steps", type=int, default=1_000_000)
    a.add_argument("--burn-in", type=int, default=100)
    a.add_argument("--seed", type=int)
    a.set_defaults(func=cmd_render)

    a = sub.add_parser("certificate", help="diameter-diminishing table")
    a.add_argument("config")
    a.add_argument("--depth", type=int, help="default: deepest level with at most 2^18 words")
    a.add_argument("--cloud", help="CSV cloud B; default: corners of the attractor's bounding box")
    a.add_argument("--threshold", type=float)
    a.set_defaults(func=cmd_certificate)

    a = sub.add_parser("explore", help="look for local-fibred systems that fail the diminishing check")
    a.add_argument("--instances", type=int, default=10)
    a.add_argument("--dimension", type=int, default=2)
    a.add_argument("--norm-max", type=float, default=1.2)
    a.add_argument("--tol", type=float, default=5e-2, help="tol_attr of the random systems")
    a.add_argument("--max-iter", type=int, default=60, help="attractor iteration budget per system")
    a.add_argument("--seed", type=int)
    a.set_defaults(func=cmd_explore)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
