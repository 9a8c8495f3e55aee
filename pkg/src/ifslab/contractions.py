"""Contraction maps on R^m, comparison functions, and sampled contractivity checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .codespace import Word
from .metricsets import DimensionError

DEFAULT_CHECK_SEED = 20240601
DEFAULT_CHECK_SAMPLES = 10_000
CHECK_SLACK = 1e-12


# -- comparison functions ----------------------------------------------------

@dataclass(frozen=True)
class ComparisonFunction:
    """An increasing, right-continuous phi with phi(t) < t for t > 0.

    Families: ``linear`` (phi(t) = c t, 0 < c < 1), ``rational``
    (phi(t) = t / (1 + t)) and ``table`` (right-continuous step function
    through ``(knots[k], values[k])``, constant after the last knot).
    """

    family: str
    c: float | None = None
    knots: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.family == "linear":
            if self.c is None or not (0.0 < self.c < 1.0):
                raise ValueError(f"linear comparison function needs 0 < c < 1, got {self.c!r}")
        elif self.family == "rational":
            pass
        elif self.family == "table":
            k = tuple(float(x) for x in self.knots)
            v = tuple(float(x) for x in self.values)
            object.__setattr__(self, "knots", k)
            object.__setattr__(self, "values", v)
            if not k or len(k) != len(v):
                raise ValueError("table needs equally long, non-empty knots and values")
            if k[0] != 0.0 or v[0] != 0.0:
                raise ValueError("table must start at (0, 0)")
            if any(b <= a for a, b in zip(k, k[1:])):
                raise ValueError("table knots must be strictly increasing")
            if any(b < a for a, b in zip(v, v[1:])):
                raise ValueError("table values must be non-decreasing")
            # phi is constant on [k_i, k_{i+1}), so phi(t) < t there iff v_i < k_i.
            if any(vi >= ki for ki, vi in zip(k[1:], v[1:])):
                raise ValueError("table violates phi(t) < t at a knot")
        else:
            raise ValueError(f"unknown comparison family {self.family!r}")

    @classmethod
    def linear(cls, c: float) -> "ComparisonFunction":
        return cls("linear", c=float(c))

    @classmethod
    def rational(cls) -> "ComparisonFunction":
        return cls("rational")

    @classmethod
    def table(cls, knots: Sequence[float], values: Sequence[float]) -> "ComparisonFunction":
        return cls("table", knots=tuple(knots), values=tuple(values))

    def __call__(self, t):
        return phi_eval(self, t)


def phi_eval(phi: ComparisonFunction, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("comparison functions are defined on [0, inf)")
    if phi.family == "linear":
        out = phi.c * t_arr
    elif phi.family == "rational":
        out = t_arr / (1.0 + t_arr)
    else:
        idx = np.searchsorted(np.asarray(phi.knots), t_arr, side="right") - 1
        out = np.asarray(phi.values)[idx]
    return float(out) if np.ndim(out) == 0 else out


def phi_iterate(phi: ComparisonFunction, t: float, n: int) -> float:
    """n-fold composition phi(phi(...phi(t)))."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if t < 0:
        raise ValueError("comparison functions are defined on [0, inf)")
    t = float(t)
    for _ in range(n):
        t = phi_eval(phi, t)
    return t


# -- maps --------------------------------------------------------------------

NAMED_FAMILIES = ("tanh", "rational")


@dataclass(frozen=True, eq=False)
class ContractionMap:
    """One map of an IFS.

    ``kind="affine"`` uses ``matrix`` and ``offset`` (x -> L x + b).
    Named families take their parameters from ``params``:

    * ``tanh``: x -> scale * tanh(x) + offset, componentwise; Lipschitz ``scale``.
    * ``rational``: x -> |x| / (1 + |x|) + offset on R (m = 1 only); a
      phi-contraction for phi(t) = t / (1 + t).
    """

    kind: str
    matrix: np.ndarray | None = None
    offset: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    witness: ComparisonFunction | None = None

    def __post_init__(self):
        if self.kind == "affine":
            L = np.array(self.matrix, dtype=float, ndmin=2)
            b = np.array(self.offset if self.offset is not None else np.zeros(L.shape[0]), dtype=float).reshape(-1)
            if L.shape[0] != L.shape[1] or b.shape[0] != L.shape[0]:
                raise DimensionError(f"affine map needs an m x m matrix and m-vector, got {L.shape} and {b.shape}")
            if not (np.all(np.isfinite(L)) and np.all(np.isfinite(b))):
                raise ValueError("affine map entries must be finite")
            L.setflags(write=False)
            b.setflags(write=False)
            object.__setattr__(self, "matrix", L)
            object.__setattr__(self, "offset", b)
            if self.witness is not None and self.witness.family == "linear":
                norm = operator_norm(L)
                if norm > self.witness.c + 1e-10:
                    raise ValueError(f"operator norm {norm:.12g} exceeds witness constant {self.witness.c}")
        elif self.kind in NAMED_FAMILIES:
            p = dict(self.params)
            off = np.array(p.get("offset", [0.0]), dtype=float).reshape(-1)
            off.setflags(write=False)
            object.__setattr__(self, "offset", off)
            if self.kind == "tanh":
                scale = float(p.get("scale", 0.5))
                unknown = set(p) - {"scale", "offset"}
                if unknown:
                    raise ValueError(f"unknown tanh parameters {sorted(unknown)}")
                p["scale"] = scale
            else:
                unknown = set(p) - {"offset"}
                if unknown:
                    raise ValueError(f"unknown rational parameters {sorted(unknown)}")
                if off.shape[0] != 1:
                    raise DimensionError("the rational family is one-dimensional")
            p["offset"] = off
            object.__setattr__(self, "params", p)
        else:
            raise ValueError(f"unknown map kind {self.kind!r}")

    @classmethod
    def affine(cls, matrix, offset=None, witness: ComparisonFunction | None = None) -> "ContractionMap":
        return cls("affine", matrix=matrix, offset=offset, witness=witness)

    @property
    def dimension(self) -> int:
        return self.offset.shape[0]

    @property
    def is_affine(self) -> bool:
        return self.kind == "affine"

    def __call__(self, x):
        return eval_map(self, x)


def eval_map(f: ContractionMap, x) -> np.ndarray:
    """Apply ``f`` to one point (shape (m,)) or a batch (shape (n, m))."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != f.dimension:
        raise DimensionError(f"point of dimension {x.shape[-1]} given to a map on R^{f.dimension}")
    with np.errstate(over="ignore", invalid="ignore"):
        if f.kind == "affine":
            y = x @ f.matrix.T + f.offset
        elif f.kind == "tanh":
            y = f.params["scale"] * np.tanh(x) + f.offset
        else:
            ax = np.abs(x)
            y = ax / (1.0 + ax) + f.offset
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("map evaluation produced a non-finite value")
    return y


def eval_word(maps: Sequence[ContractionMap], w: Word | Sequence[int], x) -> np.ndarray:
    """f_w(x) = f_{w_1}(f_{w_2}(... f_{w_n}(x))); the empty word is the identity."""
    letters = w.letters if isinstance(w, Word) else tuple(w)
    y = np.asarray(x, dtype=float)
    for i in reversed(letters):
        y = eval_map(maps[i], y)
    return y


def compose_affine(maps: Sequence[ContractionMap], w: Word | Sequence[int]) -> ContractionMap:
    """The affine map f_w as a single (L, b)."""
    letters = w.letters if isinstance(w, Word) else tuple(w)
    m = maps[0].dimension
    L = np.eye(m)
    for i in letters:
        if not maps[i].is_affine:
            raise TypeError("compose_affine needs affine maps")
        L = L @ maps[i].matrix
    b = eval_word(maps, letters, np.zeros(m))
    return ContractionMap.affine(L, b)


def affine_fixed_point(f: ContractionMap) -> np.ndarray:
    """Solve (I - L) x = b."""
    if not f.is_affine:
        raise TypeError("closed-form fixed point needs an affine map")
    m = f.dimension
    A = np.eye(m) - f.matrix
    try:
        x = np.linalg.solve(A, f.offset)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("1 is an eigenvalue of L; no unique fixed point") from exc
    if np.linalg.cond(A) > 1e12:
        raise np.linalg.LinAlgError("I - L is numerically singular")
    return x


def operator_norm(L) -> float:
    """Spectral norm of L: square root of the top eigenvalue of L^T L.

    Power iteration stalls when the two largest singular values are close,
    which would let a witness check pass a map that is not c-Lipschitz.
    """
    L = np.asarray(L, dtype=float)
    return float(np.sqrt(max(np.linalg.eigvalsh(L.T @ L)[-1], 0.0)))


@dataclass
class ContractivityReport:
    samples: int
    violations: list[tuple[np.ndarray, np.ndarray, float, float]]
    worst_excess: float

    @property
    def ok(self) -> bool:
        return not self.violations


def check_phi_contractive(f: ContractionMap, phi: ComparisonFunction, samples: int = DEFAULT_CHECK_SAMPLES,
                          region=None, seed: int = DEFAULT_CHECK_SEED) -> ContractivityReport:
    """Sample pairs in a box and collect those with d(f x, f y) > phi(d(x, y)) + 1e-12.

    ``region`` is a ``(lo, hi)`` pair of corner vectors or anything with a
    ``bounding_box()`` method; default is the unit cube. An empty violation
    list means none was found, not that ``f`` is a phi-contraction.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    m = f.dimension
    if region is None:
        lo, hi = np.zeros(m), np.ones(m)
    elif hasattr(region, "bounding_box"):
        lo, hi = region.bounding_box()
    else:
        lo, hi = (np.asarray(r, dtype=float).reshape(m) for r in region)
    if np.all(hi - lo == 0):
        hi = lo + 1.0
    rng = np.random.default_rng(seed)
    x = lo + (hi - lo) * rng.random((samples, m))
    y = lo + (hi - lo) * rng.random((samples, m))
    dx = np.linalg.norm(x - y, axis=1)
    dfx = np.linalg.norm(eval_map(f, x) - eval_map(f, y), axis=1)
    bound = np.asarray(phi_eval(phi, dx))
    excess = dfx - bound
    bad = np.nonzero(excess > CHECK_SLACK)[0]
    order = sorted(bad, key=lambda k: (-excess[k], k))
    viol = [(x[k], y[k], float(dfx[k]), float(bound[k])) for k in order]
    return ContractivityReport(samples, viol, float(excess.max()))
