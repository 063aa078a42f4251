"""Measurement-map construction: stage-one projections, random second stages,
rank-one projection families, and the entry distributions behind them.

A two-stage map first projects onto a low-dimensional subspace through a
stage-one block b(x) = (<b_i, x>)_i, then hits the coordinates with an m x d
random matrix scaled 1/m (absolute-sum geometry) or 1/sqrt(m) (squared-sum
geometry).  A rank-one family measures a matrix M through a_i^T M b_i / m.

The range of the stage-one block carries the min-norm-preimage norm
||y||_b = inf{||z|| : b(z) = y}, realized here as the Gram-inverse quadratic
form sqrt(y^T G^{-1} y); its dual is sqrt(a^T G a).

Random matrices are reproducible row by row: row i draws from substream
(seed, CH_ROW, i), so a map can be extended in m without re-drawing earlier
rows, and a JSON descriptor regenerates the map bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from ._rng import CH_ROW, substream

__all__ = [
    "DistSpec",
    "gaussian",
    "sparse_pm",
    "StageOneMap",
    "MeasurementMap",
    "sample_dist",
    "build_stage_one",
    "build_stage_one_from_span",
    "b_norm",
    "b_dual_norm",
    "apply_stage_one",
    "two_stage_map",
    "rank_one_map",
    "apply",
    "apply_columns",
    "storage_cost",
    "map_to_descriptor",
    "map_from_descriptor",
]


# ---------------------------------------------------------------------------
# entry distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistSpec:
    """Entry law: standard normal, or the three-point {0, +sqrt(q), -sqrt(q)}
    law with P(0) = (q-1)/q and P(+-sqrt(q)) = 1/(2q).  q = 1 degenerates to
    Rademacher signs.  Unit variance in both cases."""

    variant: str
    q: float = float("nan")

    def __post_init__(self) -> None:
        if self.variant not in ("gaussian", "sparse_pm"):
            raise ValueError(f"unknown distribution variant {self.variant!r}")
        if self.variant == "sparse_pm" and not self.q >= 1.0:
            raise ValueError(f"need q >= 1, got {self.q}")


def gaussian() -> DistSpec:
    return DistSpec("gaussian")


def sparse_pm(q: float) -> DistSpec:
    return DistSpec("sparse_pm", float(q))


def draw_dist(dist: DistSpec, shape, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. entries from `dist` using the supplied generator."""
    if dist.variant == "gaussian":
        return rng.standard_normal(shape)
    q = dist.q
    u = rng.random(shape)
    root_q = math.sqrt(q)
    p_zero = (q - 1.0) / q
    out = np.where(u < p_zero, 0.0, np.where(u < p_zero + 1.0 / (2.0 * q), root_q, -root_q))
    return out


def sample_dist(dist: DistSpec, shape, seed: int) -> np.ndarray:
    """Seeded i.i.d. draw; a single substream covers the whole requested shape."""
    return draw_dist(dist, shape, substream(seed))


# ---------------------------------------------------------------------------
# stage one
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StageOneMap:
    """Stage-one block b(x) = basis_block @ x with its Gram geometry."""

    basis_block: np.ndarray  # d x D, rows are the b_i coordinates
    gram: np.ndarray         # d x d, <b_i, b_j>
    is_orthonormal: bool
    cond: float
    _cho: tuple = field(repr=False, default=None, compare=False)

    @property
    def d(self) -> int:
        return self.basis_block.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis_block.shape[1]


def build_stage_one(basis_block, ambient_dim: Optional[int] = None) -> StageOneMap:
    """Build the stage-one map and its Gram matrix.

    Rows must be linearly independent: construction fails when the Gram is
    singular at working precision or its condition number exceeds 1e12.
    """
    B = np.atleast_2d(np.asarray(basis_block, dtype=float))
    if ambient_dim is not None and B.shape[1] != ambient_dim:
        raise ValueError(f"basis rows have length {B.shape[1]}, expected {ambient_dim}")
    if not np.all(np.isfinite(B)):
        raise ValueError("non-finite basis entries")
    G = B @ B.T
    w = np.linalg.eigvalsh(G)
    if w[0] <= 1e-12 * max(1.0, w[-1]):
        raise ValueError("Gram matrix singular at working precision: rows are not a basis")
    cond = float(w[-1] / w[0])
    if cond > 1e12:
        raise ValueError(f"Gram condition number {cond:.3e} exceeds 1e12")
    ortho = bool(np.max(np.abs(G - np.eye(G.shape[0]))) <= 1e-10)
    cho = scipy.linalg.cho_factor(G, lower=True)
    return StageOneMap(basis_block=B, gram=G, is_orthonormal=ortho, cond=cond, _cho=cho)


def build_stage_one_from_span(vectors, tol: float = 1e-10) -> StageOneMap:
    """Orthonormal stage-one map for the span of the given vectors.

    Net centers or other spanning families may be linearly dependent; this
    extracts an orthonormal basis of their span by SVD, keeping singular
    directions above tol times the largest.
    """
    V = np.asarray([np.asarray(v, float) for v in vectors])
    if V.ndim != 2 or V.size == 0:
        raise ValueError("need a nonempty list of vectors")
    _, svals, vt = np.linalg.svd(V, full_matrices=False)
    keep = svals > tol * svals[0]
    if not np.any(keep):
        raise ValueError("span is numerically zero")
    return build_stage_one(vt[keep])


def apply_stage_one(stage_one: StageOneMap, x) -> np.ndarray:
    return stage_one.basis_block @ np.asarray(x, dtype=float)


def b_norm(stage_one: StageOneMap, y) -> float:
    """Min-norm-preimage norm of a coordinate vector: sqrt(y^T G^{-1} y).

    Equals the Euclidean norm of the orthogonal projection of any preimage
    onto the row space, so for orthonormal rows it is just ||y||_2.
    """
    y = np.asarray(y, dtype=float)
    z = scipy.linalg.cho_solve(stage_one._cho, y)
    return float(math.sqrt(max(float(y @ z), 0.0)))


def b_dual_norm(stage_one: StageOneMap, a) -> float:
    """Dual norm sup{|a^T y| : ||y||_b <= 1} = sqrt(a^T G a)."""
    a = np.asarray(a, dtype=float)
    return float(math.sqrt(max(float(a @ (stage_one.gram @ a)), 0.0)))


# ---------------------------------------------------------------------------
# measurement maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementMap:
    """Executable linear map: two-stage (matrix @ b(x), scaled by the p rule)
    or rank-one family (a_i^T M b_i / m)."""

    variant: str                 # "two_stage" | "rank_one"
    m: int
    dist: DistSpec
    seed: int
    p_scale: int = 2             # two_stage only: 1 -> divide by m, 2 -> divide by sqrt(m)
    stage_one: Optional[StageOneMap] = None
    ambient_dim: int = 0         # two_stage input dimension when stage_one is None
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    n1: int = 0                  # rank_one row/column dims
    n2: int = 0
    a_vecs: Optional[np.ndarray] = field(default=None, repr=False)
    b_vecs: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def input_dim(self) -> int:
        if self.variant == "rank_one":
            return self.n1 * self.n2
        return self.stage_one.ambient_dim if self.stage_one is not None else self.ambient_dim

    @property
    def scale(self) -> float:
        if self.variant == "rank_one" or self.p_scale == 1:
            return 1.0 / self.m
        return 1.0 / math.sqrt(self.m)


def _draw_rows(dist: DistSpec, m: int, width: int, seed: int) -> np.ndarray:
    rows = np.empty((m, width))
    for i in range(m):
        rows[i] = draw_dist(dist, width, substream(seed, CH_ROW, i))
    return rows


def two_stage_map(
    stage_one: Optional[StageOneMap],
    dist: DistSpec,
    m: int,
    p: int,
    seed: int,
    ambient_dim: Optional[int] = None,
) -> MeasurementMap:
    """Random second stage over a stage-one block (None = identity).

    p = 1 scales measurements by 1/m, p = 2 by 1/sqrt(m); with an identity
    stage one and Gaussian entries the p = 2 case is the classical A/sqrt(m)
    matrix.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p}")
    if stage_one is None:
        if ambient_dim is None or ambient_dim < 1:
            raise ValueError("ambient_dim required for an identity stage one")
        d = int(ambient_dim)
    else:
        d = stage_one.d
        ambient_dim = stage_one.ambient_dim
    matrix = _draw_rows(dist, m, d, seed)
    return MeasurementMap(
        variant="two_stage", m=int(m), dist=dist, seed=int(seed), p_scale=int(p),
        stage_one=stage_one, ambient_dim=int(ambient_dim), matrix=matrix,
    )


def rank_one_map(m: int, n1: int, n2: int, dist: DistSpec, seed: int) -> MeasurementMap:
    """Rank-one family: measurement i is a_i^T M b_i / m; a_i and b_i are the
    first n1 and last n2 entries of the substream-(seed, i) draw."""
    if m < 1 or n1 < 1 or n2 < 1:
        raise ValueError("need m, n1, n2 >= 1")
    block = _draw_rows(dist, m, n1 + n2, seed)
    return MeasurementMap(
        variant="rank_one", m=int(m), dist=dist, seed=int(seed),
        n1=int(n1), n2=int(n2), a_vecs=block[:, :n1].copy(), b_vecs=block[:, n1:].copy(),
    )


def apply(L: MeasurementMap, x) -> np.ndarray:
    """Evaluate the map on a vector (or, for rank-one, a matrix or its
    row-major flattening)."""
    x = np.asarray(x, dtype=float)
    if L.variant == "rank_one":
        M = x.reshape(L.n1, L.n2) if x.ndim == 1 else x
        if M.shape != (L.n1, L.n2):
            raise ValueError(f"expected a {L.n1} x {L.n2} matrix, got {M.shape}")
        return np.einsum("ij,jk,ik->i", L.a_vecs, M, L.b_vecs) / L.m
    if x.shape != (L.input_dim,):
        raise ValueError(f"expected a vector of length {L.input_dim}, got {x.shape}")
    y = L.stage_one.basis_block @ x if L.stage_one is not None else x
    return (L.matrix @ y) * L.scale


def apply_columns(L: MeasurementMap, X: np.ndarray) -> np.ndarray:
    """Two-stage batch evaluation: X has one input vector per column."""
    if L.variant != "two_stage":
        raise ValueError("apply_columns supports two-stage maps only")
    X = np.asarray(X, dtype=float)
    Y = L.stage_one.basis_block @ X if L.stage_one is not None else X
    return (L.matrix @ Y) * L.scale


def storage_cost(L: MeasurementMap) -> int:
    """Stored real coefficients: m(n1+n2) for rank-one, m*d for two-stage."""
    if L.variant == "rank_one":
        return L.m * (L.n1 + L.n2)
    return L.m * L.matrix.shape[1]


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

def _dist_payload(dist: DistSpec) -> dict:
    if dist.variant == "gaussian":
        return {"variant": "gaussian"}
    return {"variant": "sparse_pm", "q": dist.q}


def map_to_descriptor(L: MeasurementMap) -> str:
    """JSON descriptor {variant, m, dims, dist, seed, p_scale}.

    Random matrices are never stored; loading regenerates them bit-exactly
    from (dist, seed).  A non-identity stage-one block is data, not
    randomness, so its rows ride along explicitly.
    """
    if L.variant == "rank_one":
        dims = {"n1": L.n1, "n2": L.n2}
    else:
        dims = {"d": L.stage_one.d if L.stage_one is not None else L.ambient_dim,
                "ambient": L.input_dim}
    payload = {
        "variant": L.variant,
        "m": L.m,
        "dims": dims,
        "dist": _dist_payload(L.dist),
        "seed": L.seed,
        "p_scale": L.p_scale if L.variant == "two_stage" else None,
        "stage_one": (
            None if L.variant == "rank_one" or L.stage_one is None
            else [list(map(float, row)) for row in L.stage_one.basis_block]
        ),
    }
    return json.dumps(payload)


def map_from_descriptor(text: str) -> MeasurementMap:
    d = json.loads(text)
    dist = DistSpec(d["dist"]["variant"], d["dist"].get("q", float("nan")))
    if d["variant"] == "rank_one":
        return rank_one_map(d["m"], d["dims"]["n1"], d["dims"]["n2"], dist, d["seed"])
    stage_one = None
    if d.get("stage_one") is not None:
        stage_one = build_stage_one(np.asarray(d["stage_one"], dtype=float))
    return two_stage_map(
        stage_one, dist, d["m"], d["p_scale"], d["seed"],
        ambient_dim=d["dims"]["ambient"] if stage_one is None else None,
    )
