"""Iterated function systems: fractal operator, attractors, coding map, certificates."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .codespace import (
    DEFAULT_WORD_CAP,
    AddressSpec,
    Alphabet,
    EnumerationCapError,
    Word,
)
from .contractions import (
    ComparisonFunction,
    ContractionMap,
    affine_fixed_point,
    compose_affine,
    eval_map,
    eval_word,
    phi_iterate,
)
from .metricsets import DimensionError, PointCloud, as_cloud, hausdorff, within_dilation

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """An iteration ran out of budget before reaching its tolerance."""


@dataclass(frozen=True, eq=False)
class IfsInstance:
    maps: tuple[ContractionMap, ...]
    tol_point: float = 1e-9
    tol_attr: float = 1e-6
    max_depth: int = 10_000
    dedup: float | None = None
    word_cap: int = DEFAULT_WORD_CAP
    max_iter: int = 200
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("an IFS needs at least one map")
        dims = {f.dimension for f in maps}
        if len(dims) != 1:
            raise DimensionError(f"maps disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "maps", maps)
        if self.dedup is None:
            object.__setattr__(self, "dedup", self.tol_attr / 4)
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != len(maps) or len(set(names)) != len(names):
                raise ValueError("letter names must be unique, one per map")
            object.__setattr__(self, "names", names)

    @property
    def dimension(self) -> int:
        return self.maps[0].dimension

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(len(self.maps))

    @property
    def all_affine(self) -> bool:
        return all(f.is_affine for f in self.maps)

    def common_witness(self) -> ComparisonFunction | None:
        w = self.maps[0].witness
        if w is None or any(f.witness != w for f in self.maps[1:]):
            return None
        return w

    def origin(self) -> PointCloud:
        return PointCloud(np.zeros((1, self.dimension)))


@dataclass
class AttractorResult:
    cloud: PointCloud
    iterations: int
    final_step_hausdorff: float
    converged: bool
    history: list[float] = field(default_factory=list)


@dataclass
class DiminishingCertificate:
    depths: list[int]
    max_diams: list[float]
    phi_bounds: list[float] | None
    threshold: float
    verdict: bool
    base_diameter: float


# -- fractal operator and attractor ------------------------------------------

def fractal_operator(S: IfsInstance, B, dedup: float | None | bool = True) -> PointCloud:
    """Union of the map images of ``B``, snapped to the instance dedup grid."""
    B = as_cloud(B)
    if B.dimension != S.dimension:
        raise DimensionError(f"cloud of dimension {B.dimension} given to an IFS on R^{S.dimension}")
    images = np.vstack([eval_map(f, B.points) for f in S.maps])
    cell = S.dedup if dedup is True else (dedup or None)
    return PointCloud(images, dedup=cell)


def _probe_set(B: PointCloud) -> PointCloud:
    lo, hi = B.bounding_box()
    centre = (lo + hi) / 2
    r = max(1.0, float(np.max(hi - lo)))
    m = B.dimension
    return PointCloud(np.vstack([B.points, centre + r * np.eye(m), centre - r * np.eye(m)]))


def _expanding_letter(S: IfsInstance) -> int | None:
    """A map that is affine with spectral radius >= 1, if any.

    Such a map keeps large balls from shrinking (F^n(B) contains f_i^n(B)),
    so no set attracts every bounded B.
    """
    for i, f in enumerate(S.maps):
        if f.is_affine and np.max(np.abs(np.linalg.eigvals(f.matrix))) >= 1.0:
            return i
    return None


def _norm_contractive(S: IfsInstance) -> bool:
    return S.all_affine and all(np.linalg.norm(f.matrix, 2) < 1 for f in S.maps)


MAX_CLOUD = 1 << 21
DIVERGING_RUN = 8  # this many consecutive growing Cauchy steps end the iteration


def _iterate(S: IfsInstance, B: PointCloud, budget: int):
    history: list[float] = []
    step = float("inf")
    for k in range(1, budget + 1):
        nxt = fractal_operator(S, B)
        step = hausdorff(B, nxt)
        history.append(step)
        B = nxt
        if step < S.tol_attr:
            return B, k, step, True, history
        if len(B) > MAX_CLOUD:
            log.warning("attractor cloud exceeded %d points; stopping", MAX_CLOUD)
            break
        tail = history[-DIVERGING_RUN - 1:]
        if len(tail) > DIVERGING_RUN and all(b > a for a, b in zip(tail, tail[1:])):
            log.info("Cauchy steps grew %d times in a row; stopping", DIVERGING_RUN)
            break
    return B, len(history), step, False, history


def attractor(S: IfsInstance, seed=None, max_iter: int | None = None, probe: bool = True) -> AttractorResult:
    """Iterate the fractal operator until successive clouds are tol_attr-close.

    The stopping rule is the Cauchy step; for a c-contractive system the
    distance to the true attractor is then at most tol_attr * c / (1 - c)
    plus the snapping error. The run is reported as not converged when

    * some map is affine with spectral radius >= 1 (checked up front; no
      iteration happens),
    * the budget runs out, the step grows DIVERGING_RUN times in a row, or
      the cloud exceeds MAX_CLOUD points,
    * ``probe`` is set, the maps are not all affine with norm < 1, and a
      second, spread-out start set does not land within 2*tol_attr +
      2*dedup of the first result.
    """
    B = S.origin() if seed is None else as_cloud(seed)
    budget = S.max_iter if max_iter is None else max_iter
    bad = _expanding_letter(S)
    if bad is not None:
        log.info("map %d has spectral radius >= 1; no attractor", bad)
        return AttractorResult(B, 0, float("inf"), False, [])
    cloud, k, step, ok, history = _iterate(S, B, budget)
    if ok and probe and not _norm_contractive(S):
        other, _, _, ok2, _ = _iterate(S, _probe_set(B), budget)
        ok = ok2 and hausdorff(cloud, other) <= 2 * S.tol_attr + 2 * S.dedup
    return AttractorResult(cloud, k, step, ok, history)


def chaos_game(S: IfsInstance, steps: int, burn_in: int = 0, rng_seed: int = 0, start=None) -> PointCloud:
    """Random-orbit sampler: x <- f_i(x) with i uniform, keeping points after ``burn_in``."""
    if not (steps > burn_in >= 0):
        raise ValueError("need steps > burn_in >= 0")
    rng = np.random.default_rng(rng_seed)
    choice = rng.integers(0, len(S.maps), size=steps)
    x = np.zeros(S.dimension) if start is None else np.asarray(start, dtype=float)
    out = np.empty((steps - burn_in, S.dimension))
    if S.all_affine:
        Ls = [f.matrix for f in S.maps]
        bs = [f.offset for f in S.maps]
        for t in range(steps):
            i = choice[t]
            x = Ls[i] @ x + bs[i]
            if t >= burn_in:
                out[t - burn_in] = x
    else:
        for t in range(steps):
            x = eval_map(S.maps[choice[t]], x)
            if t >= burn_in:
                out[t - burn_in] = x
    return PointCloud(out)


# -- coding map and fixed points ---------------------------------------------

def _banach(S: IfsInstance, letters: tuple[int, ...], start=None) -> np.ndarray:
    x = np.zeros(S.dimension) if start is None else np.asarray(start, dtype=float)
    for _ in range(S.max_depth):
        y = eval_word(S.maps, letters, x)
        if np.linalg.norm(y - x) < S.tol_point:
            return y
        x = y
    raise ConvergenceError(f"fixed-point iteration for word {letters} did not reach {S.tol_point} "
                           f"in {S.max_depth} steps")


def _check_word(S: IfsInstance, w: Word):
    if w.alphabet != S.alphabet:
        raise ValueError(f"word over {w.alphabet} used with an IFS of {len(S.maps)} maps")


def _periodic_point(S: IfsInstance, letters: tuple[int, ...]) -> np.ndarray:
    # Closed form when affine; a singular I - L (e.g. the identity) falls back
    # to iteration from the origin, which either stalls on some fixed point or
    # raises ConvergenceError.
    if S.all_affine:
        try:
            return affine_fixed_point(compose_affine(S.maps, letters))
        except np.linalg.LinAlgError:
            pass
    return _banach(S, letters)


def coding_map(S: IfsInstance, a: AddressSpec) -> np.ndarray:
    """The point with address ``a``: f_pre applied to the fixed point of f_period."""
    _check_word(S, a.period)
    return eval_word(S.maps, a.preperiod, _periodic_point(S, a.period.letters))


def word_fixed_point(S: IfsInstance, w: Word) -> np.ndarray:
    """The unique fixed point of f_w for a non-empty word w."""
    if len(w) == 0:
        raise ValueError("the empty word has no distinguished fixed point")
    _check_word(S, w)
    return _periodic_point(S, w.letters)


# -- word-image kernels ------------------------------------------------------

def _reduce_for_diameter(S: IfsInstance, pts: np.ndarray) -> np.ndarray:
    """Affine images preserve convex hulls, so only hull vertices matter for diameters."""
    if not S.all_affine or len(pts) <= 4:
        return pts
    if pts.shape[1] == 1:
        return np.array([pts.min(axis=0), pts.max(axis=0)])
    from scipy.spatial import ConvexHull, QhullError

    try:
        return pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        return pts


def word_images(S: IfsInstance, pts: np.ndarray, n: int) -> np.ndarray:
    """Array of shape (|I|^n, N, m): f_w(pts) for every word of length n, lexicographic."""
    k = len(S.maps)
    imgs = pts[None, :, :]
    for _ in range(n):
        # f_{i w} = f_i o f_w, so prepending letter i to every word at once keeps lex order
        imgs = np.concatenate([eval_map(f, imgs) for f in S.maps], axis=0)
    assert imgs.shape[0] == k**n
    return imgs


def _block_diameters(imgs: np.ndarray) -> np.ndarray:
    """Diameter of each block imgs[w] (shape (W, N, m))."""
    W, N, _ = imgs.shape
    if N < 2:
        return np.zeros(W)
    iu, ju = np.triu_indices(N, 1)
    out = np.empty(W)
    rows = max(1, (1 << 22) // len(iu))
    for s in range(0, W, rows):
        blk = imgs[s:s + rows]
        diff = blk[:, iu, :] - blk[:, ju, :]
        out[s:s + rows] = np.sqrt((diff * diff).sum(axis=-1).max(axis=1))
    return out


def diminishing_certificate(S: IfsInstance, B, max_n: int, threshold: float | None = None) -> DiminishingCertificate:
    """max over words of length n of diam(f_w(B)), for n = 1..max_n.

    When every map carries the same witness phi the bound phi^[n](diam B)
    is attached. The verdict asks for a non-increasing sequence whose last
    value is below ``threshold`` (default tol_attr).
    """
    B = as_cloud(B)
    k = len(S.maps)
    if k**max_n > S.word_cap:
        raise EnumerationCapError(f"{k}^{max_n} words exceeds cap {S.word_cap}")
    from .metricsets import diameter

    thr = S.tol_attr if threshold is None else threshold
    pts = _reduce_for_diameter(S, B.points)
    base = diameter(B)
    depths, diams = [], []
    imgs = pts[None, :, :]
    for n in range(1, max_n + 1):
        imgs = np.concatenate([eval_map(f, imgs) for f in S.maps], axis=0)
        depths.append(n)
        diams.append(float(_block_diameters(imgs).max()))
    phi = S.common_witness()
    bounds = [phi_iterate(phi, base, n) for n in depths] if phi is not None else None
    monotone = all(b <= a + 1e-12 for a, b in zip(diams, diams[1:]))
    verdict = bool(diams) and monotone and diams[-1] < thr
    return DiminishingCertificate(depths, diams, bounds, thr, verdict, base)


def invariant_superset(S: IfsInstance, B, n_max: int = 20, attr: AttractorResult | None = None) -> PointCloud:
    """Finite stand-in for the closure of A_S together with the orbit F^k(B), k <= n_max.

    The orbit stops early once a layer neither grows nor occupies a new dedup cell.

    Raises ConvergenceError if the attractor does not converge. The result
    is checked to be forward invariant up to 2*dedup + tol_attr.
    """
    B = as_cloud(B)
    if attr is None:
        attr = attractor(S, B)
    if not attr.converged:
        raise ConvergenceError("attractor did not converge; no invariant superset available")
    acc = attr.cloud.union(B, dedup=S.dedup)
    layer = B
    for _ in range(n_max):
        nxt = fractal_operator(S, layer)
        grown = acc.union(nxt, dedup=S.dedup)
        if len(grown) == len(acc) and len(nxt) == len(layer):
            # the orbit has settled inside occupied cells; later layers only move within them
            break
        layer, acc = nxt, grown
    slack = 2 * S.dedup + S.tol_attr
    if not within_dilation(fractal_operator(S, acc), acc, slack):
        raise ConvergenceError(f"orbit of B not yet within {slack:g} of the superset after {n_max} steps; "
                               "raise n_max")
    return acc
