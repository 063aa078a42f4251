"""Model sets, normalized secants, greedy nets, and box-dimension estimates.

Generators for the low-dimensional sets an embedding is asked to preserve:
k-sparse unit vectors, low-rank unit-Frobenius matrices, the correlated
two-point family x_i = r^i (e_i + b e_0), Haar-sparse coefficient vectors,
and explicit point clouds.  Companion tools build normalized secant samples
(unit-normalized differences of model points), farthest-point epsilon nets,
least-squares box-dimension fits, and the closed-form isometry constants of
the correlated family.

All sampling is reproducible: item i of any Monte-Carlo loop draws from the
substream (seed, i), so outputs are independent of evaluation order and can
be extended without re-drawing earlier items.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from ._rng import substream

__all__ = [
    "Sparse",
    "LowRank",
    "CorrelatedSeq",
    "HaarSparse",
    "PointCloud",
    "ModelSpec",
    "SecantSample",
    "NetResult",
    "BoxDimFit",
    "AlphaResult",
    "ModelCollapseError",
    "sample_sparse_unit",
    "sample_lowrank_unit",
    "sample_haar_sparse_unit",
    "correlated_sequence",
    "sample_model",
    "normalized_secants",
    "greedy_net",
    "boxdim_fit",
    "secant_alpha_formula",
    "secant_alpha_bruteforce",
    "vk_min_separation",
    "vk_vectors",
    "vk_min_pairwise",
    "save_points_csv",
    "load_points_csv",
    "points_to_json",
    "points_from_json",
    "net_result_to_json",
]


class ModelCollapseError(RuntimeError):
    """Secant sampling rejected almost every pair (the model is a near-point)."""


# ---------------------------------------------------------------------------
# model specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sparse:
    """k-sparse unit vectors in R^n."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if not (1 <= self.k <= self.n):
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")


@dataclass(frozen=True)
class LowRank:
    """Rank <= r matrices in R^{n1 x n2} with unit Frobenius norm."""

    n1: int
    n2: int
    r: int

    def __post_init__(self) -> None:
        if not (1 <= self.r <= min(self.n1, self.n2)):
            raise ValueError(f"need 1 <= r <= min(n1,n2), got r={self.r}")


@dataclass(frozen=True)
class CorrelatedSeq:
    """The family x_i = r^i (e_i + b e_0), i = 1..i_max, truncated to i_max."""

    r: float
    b: float
    i_max: int

    def __post_init__(self) -> None:
        if not (0.0 < self.r < 1.0):
            raise ValueError(f"need 0 < r < 1, got {self.r}")
        if self.b <= 0.0:
            raise ValueError(f"need b > 0, got {self.b}")
        if self.i_max < 2:
            raise ValueError(f"need i_max >= 2, got {self.i_max}")


@dataclass(frozen=True)
class HaarSparse:
    """k-sparse unit vectors of n Haar coefficients (sparsity in the wavelet domain)."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if not (1 <= self.k <= self.n):
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")


@dataclass(frozen=True)
class PointCloud:
    """Explicit list of ambient vectors."""

    points: tuple

    def __post_init__(self) -> None:
        pts = tuple(np.asarray(p, dtype=float) for p in self.points)
        if not pts:
            raise ValueError("empty point cloud")
        dim = pts[0].shape
        for p in pts:
            if p.ndim != 1 or p.shape != dim or p.size == 0:
                raise ValueError("points must share one positive ambient dimension")
            if not np.all(np.isfinite(p)):
                raise ValueError("non-finite coordinates")
        object.__setattr__(self, "points", pts)


ModelSpec = Union[Sparse, LowRank, CorrelatedSeq, HaarSparse, PointCloud]


@dataclass(frozen=True)
class SecantSample:
    """Unit direction (x1 - x2)/||x1 - x2|| with the generating pair recorded."""

    direction: np.ndarray
    pair_ids: tuple


@dataclass(frozen=True)
class NetResult:
    """Farthest-point greedy net: centers drawn from the input points."""

    centers: list
    radius: float
    covered_count: int
    center_ids: tuple = ()


@dataclass(frozen=True)
class BoxDimFit:
    """OLS slope of log(net count) against log(1/eps)."""

    slope: float
    intercept: float
    eps_grid: tuple
    counts: tuple
    residual: float
    monotone: bool


@dataclass(frozen=True)
class AlphaResult:
    """Isometry constants of the correlated family over pair gaps t = j - i."""

    alpha_lb: float
    alpha_exact: float
    t_min: int


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def sample_sparse_unit(n: int, k: int, count: int, seed: int) -> list:
    """Draw `count` k-sparse unit vectors: uniform support, normal values, normalized."""
    Sparse(n, k)
    if count < 1:
        raise ValueError("count >= 1 required")
    out = []
    for i in range(count):
        rng = substream(seed, i)
        while True:
            support = rng.choice(n, size=k, replace=False)
            vals = rng.standard_normal(k)
            nrm = np.linalg.norm(vals)
            if nrm > 0.0:  # the all-zero draw has probability zero
                break
        x = np.zeros(n)
        x[support] = vals / nrm
        out.append(x)
    return out


def sample_lowrank_unit(n1: int, n2: int, r: int, count: int, seed: int) -> list:
    """Unit-Frobenius rank <= r matrices G1 @ G2.T, flattened row-major."""
    LowRank(n1, n2, r)
    if count < 1:
        raise ValueError("count >= 1 required")
    out = []
    for i in range(count):
        rng = substream(seed, i)
        while True:
            g1 = rng.standard_normal((n1, r))
            g2 = rng.standard_normal((n2, r))
            m = g1 @ g2.T
            nrm = np.linalg.norm(m)
            if nrm > 0.0:
                break
        out.append((m / nrm).reshape(-1))
    return out


def sample_haar_sparse_unit(n: int, k: int, count: int, seed: int) -> list:
    """Sparse unit vectors in the Haar coefficient domain (same law as sample_sparse_unit)."""
    HaarSparse(n, k)
    return sample_sparse_unit(n, k, count, seed)


def correlated_sequence(r: float, b: float, i_max: int) -> list:
    """x_i = r^i (e_i + b e_0) for i = 1..i_max, in ambient dimension i_max + 1.

    Entry 0 holds b r^i and entry i holds r^i, so ||x_i|| = r^i sqrt(1 + b^2)
    and norms decay geometrically with ratio r.
    """
    if not (0.0 < r < 1.0):
        raise ValueError("need 0 < r < 1")
    if b <= 0.0:
        raise ValueError("need b > 0")
    if i_max < 1:
        raise ValueError("need i_max >= 1")
    out = []
    for i in range(1, i_max + 1):
        x = np.zeros(i_max + 1)
        x[0] = b * r**i
        x[i] = r**i
        out.append(x)
    return out


def sample_model(spec: ModelSpec, count: int, seed: int) -> list:
    """Dispatch a model specification to its sampler.

    PointCloud and CorrelatedSeq are deterministic enumerations; `count` and
    `seed` are ignored for them.
    """
    if isinstance(spec, Sparse):
        return sample_sparse_unit(spec.n, spec.k, count, seed)
    if isinstance(spec, LowRank):
        return sample_lowrank_unit(spec.n1, spec.n2, spec.r, count, seed)
    if isinstance(spec, HaarSparse):
        return sample_haar_sparse_unit(spec.n, spec.k, count, seed)
    if isinstance(spec, CorrelatedSeq):
        return correlated_sequence(spec.r, spec.b, spec.i_max)
    if isinstance(spec, PointCloud):
        return list(spec.points)
    raise TypeError(f"unknown model spec {spec!r}")


# ---------------------------------------------------------------------------
# normalized secants
# ---------------------------------------------------------------------------

def _gap_ok(x1: np.ndarray, x2: np.ndarray, min_gap: float) -> float:
    d = float(np.linalg.norm(x1 - x2))
    thresh = min_gap * max(float(np.linalg.norm(x1)), float(np.linalg.norm(x2)), 1.0)
    return d if d > thresh else 0.0


def normalized_secants(
    points: Union[Sequence[np.ndarray], ModelSpec, Callable[[int, int], list]],
    count: int | None = None,
    min_gap: float = 1e-9,
    seed: int = 0,
) -> list:
    """Unit-normalized differences of model-point pairs.

    With an explicit point list and count=None, every ordered pair passing the
    gap filter is returned; with a count, pairs are sampled uniformly, item i
    from substream (seed, i).  With a ModelSpec (or a sampler callable taking
    (count, seed)), fresh model points are drawn and consecutive draws 2i and
    2i+1 form pair i; pair_ids then index that draw stream, so the generating
    points are recoverable from (spec, seed).

    Raises ModelCollapseError when more than 99 percent of attempted pairs
    fall below the relative gap threshold.
    """
    if min_gap <= 0.0:
        raise ValueError("min_gap > 0 required")

    if isinstance(points, (CorrelatedSeq, PointCloud)):
        points = sample_model(points, 0, seed)  # deterministic finite families
    elif isinstance(points, (Sparse, LowRank, HaarSparse)):
        spec = points
        sampler = lambda c, s: sample_model(spec, c, s)  # noqa: E731
        return _secants_from_stream(sampler, count or 1, min_gap, seed)
    elif callable(points) and not isinstance(points, Sequence):
        return _secants_from_stream(points, count or 1, min_gap, seed)

    pts = [np.asarray(p, dtype=float) for p in points]
    if len(pts) < 2:
        raise ValueError("need at least 2 points")

    if count is None:
        out = []
        for i in range(len(pts)):
            for j in range(len(pts)):
                if i == j:
                    continue
                d = _gap_ok(pts[i], pts[j], min_gap)
                if d > 0.0:
                    out.append(SecantSample(_unit(pts[i] - pts[j]), (i, j)))
        if not out:
            raise ModelCollapseError("no pair passed the gap filter")
        return out

    out = []
    attempts = 0
    for i in range(count):
        rng = substream(seed, i)
        for _ in range(10_000):
            attempts += 1
            a, b_ = rng.integers(0, len(pts), size=2)
            if a == b_:
                continue
            d = _gap_ok(pts[a], pts[b_], min_gap)
            if d > 0.0:
                out.append(SecantSample(_unit(pts[a] - pts[b_]), (int(a), int(b_))))
                break
        else:
            raise ModelCollapseError("rejection rate above 99%: model collapses to a point")
        if attempts >= 1000 and len(out) / attempts < 0.01:
            raise ModelCollapseError("rejection rate above 99%: model collapses to a point")
    return out


def _secants_from_stream(sampler, count, min_gap, seed):
    # consecutive stream items (2i, 2i+1) form candidate pair i; failed pairs
    # are skipped and the stream extended, keeping item draws order-independent
    out = []
    next_idx = 0
    attempts = 0
    while len(out) < count:
        need = count - len(out)
        pool = sampler(next_idx + 2 * need, seed)
        while next_idx + 1 < len(pool) and len(out) < count:
            a, b_ = next_idx, next_idx + 1
            x1, x2 = np.asarray(pool[a], float), np.asarray(pool[b_], float)
            next_idx += 2
            attempts += 1
            if _gap_ok(x1, x2, min_gap) > 0.0:
                out.append(SecantSample(_unit(x1 - x2), (a, b_)))
            elif attempts >= 1000 and len(out) / attempts < 0.01:
                raise ModelCollapseError("rejection rate above 99%: model collapses to a point")
        if attempts > 100 * count + 1000:
            raise ModelCollapseError("rejection rate above 99%: model collapses to a point")
    return out


# ---------------------------------------------------------------------------
# nets and box dimension
# ---------------------------------------------------------------------------

def greedy_net(points: Sequence[np.ndarray], eps: float) -> NetResult:
    """Farthest-point greedy epsilon net with centers among the input points.

    Starts at index 0 and repeatedly adds the point farthest from the current
    centers (lowest index on ties) until every point sits within eps of some
    center.  Guarantees: coverage within eps (closed balls), centers pairwise
    strictly more than eps apart.
    """
    if eps <= 0.0:
        raise ValueError("eps > 0 required")
    pts = np.asarray([np.asarray(p, float) for p in points])
    if pts.size == 0:
        raise ValueError("points nonempty required")
    n = pts.shape[0]
    center_ids = [0]
    mindist = np.linalg.norm(pts - pts[0], axis=1)
    while True:
        far = int(np.argmax(mindist))  # argmax takes the first maximum: lowest index wins
        if mindist[far] <= eps:
            break
        center_ids.append(far)
        mindist = np.minimum(mindist, np.linalg.norm(pts - pts[far], axis=1))
    return NetResult(
        centers=[pts[i].copy() for i in center_ids],
        radius=float(eps),
        covered_count=int(n),
        center_ids=tuple(center_ids),
    )


def boxdim_fit(points: Sequence[np.ndarray], eps_grid: Sequence[float]) -> BoxDimFit:
    """Least-squares slope of log(greedy net count) against log(1/eps).

    The limsup in the box-counting dimension is out of numerical reach, so the
    result is an estimate; the RMS residual of the fit and a monotonicity flag
    (counts should not decrease as eps shrinks) are reported alongside it.
    """
    grid = [float(e) for e in eps_grid]
    if len(grid) < 3:
        raise ValueError("need at least 3 eps values")
    if any(not (0.0 < e < 1.0) for e in grid):
        raise ValueError("eps values must lie in (0, 1)")
    if any(grid[i] <= grid[i + 1] for i in range(len(grid) - 1)):
        raise ValueError("eps_grid must be strictly decreasing")
    counts = [len(greedy_net(points, e).centers) for e in grid]
    monotone = all(counts[i] <= counts[i + 1] for i in range(len(counts) - 1))
    x = np.log(1.0 / np.asarray(grid))
    y = np.log(np.asarray(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return BoxDimFit(float(slope), float(intercept), tuple(grid), tuple(counts), resid, monotone)


# ---------------------------------------------------------------------------
# correlated-family closed forms
# ---------------------------------------------------------------------------

def _gap_ratio_sq(r: float, b: float, t: int) -> float:
    # squared e0-alignment of the secant of a pair at gap t = j - i
    u = 1.0 - r**t
    return b * b * u * u / (1.0 + r ** (2 * t) + b * b * u * u)


def secant_alpha_formula(r: float, b: float, t_max: int = 60) -> AlphaResult:
    """Closed-form isometry constants of the correlated family.

    alpha_lb is the strict lower bound sqrt(b^2 (1-r)^2 / (1 + r^2 + b^2));
    alpha_exact is sqrt(min over gaps t >= 1 of
    b^2 (1-r^t)^2 / (1 + r^{2t} + b^2 (1-r^t)^2)), scanned over t <= t_max.
    """
    if not (0.0 < r < 1.0) or b <= 0.0:
        raise ValueError("need 0 < r < 1 and b > 0")
    lb = math.sqrt(b * b * (1.0 - r) ** 2 / (1.0 + r * r + b * b))
    vals = [(_gap_ratio_sq(r, b, t), t) for t in range(1, t_max + 1)]
    best, t_min = min(vals)
    return AlphaResult(alpha_lb=lb, alpha_exact=math.sqrt(best), t_min=t_min)


def secant_alpha_bruteforce(r: float, b: float, i_max: int):
    """Exhaustive minimum of |<x_i - x_j, e0>| / ||x_i - x_j|| over 1 <= i < j <= i_max.

    Returns (minimum, (i, j) witness).  Scans the actual truncated vectors, so
    it doubles as an oracle for secant_alpha_formula.
    """
    if i_max < 2:
        raise ValueError("need i_max >= 2")
    xs = correlated_sequence(r, b, i_max)
    best = math.inf
    witness = (0, 0)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            diff = xs[i] - xs[j]
            ratio = abs(diff[0]) / np.linalg.norm(diff)
            if ratio < best:
                best = float(ratio)
                witness = (i + 1, j + 1)  # vectors are x_1..x_{i_max}
    return best, witness


def vk_min_separation(r: float, b: float) -> float:
    """Pairwise-distance floor 1/sqrt(1 + r^2 + b^2 (1-r)^2) for the v_k family."""
    if not (0.0 < r < 1.0) or b <= 0.0:
        raise ValueError("need 0 < r < 1 and b > 0")
    return 1.0 / math.sqrt(1.0 + r * r + b * b * (1.0 - r) ** 2)


def vk_vectors(r: float, b: float, k_max: int) -> list:
    """v_k = (e_{2k} - r e_{2k+1} + b(1-r) e_0) / sqrt(1 + r^2 + b^2 (1-r)^2), k = 1..k_max."""
    if k_max < 1:
        raise ValueError("need k_max >= 1")
    nrm = math.sqrt(1.0 + r * r + b * b * (1.0 - r) ** 2)
    dim = 2 * k_max + 2
    out = []
    for k in range(1, k_max + 1):
        v = np.zeros(dim)
        v[0] = b * (1.0 - r)
        v[2 * k] = 1.0
        v[2 * k + 1] = -r
        out.append(v / nrm)
    return out


def vk_min_pairwise(r: float, b: float, k_max: int) -> float:
    """Observed minimum pairwise distance of the v_k family, for checking the floor."""
    vs = vk_vectors(r, b, k_max)
    best = math.inf
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            best = min(best, float(np.linalg.norm(vs[i] - vs[j])))
    return best


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def save_points_csv(path, points: Sequence[np.ndarray]) -> None:
    pts = [np.asarray(p, float) for p in points]
    dim = pts[0].size
    with open(path, "w") as fh:
        fh.write(f"# dim={dim}\n")
        for p in pts:
            fh.write(",".join(f"{v:.17g}" for v in p) + "\n")


def load_points_csv(path) -> list:
    points = []
    with open(path) as fh:
        first = fh.readline().strip()
        if not first.startswith("# dim="):
            raise ValueError("missing '# dim=<n>' header line")
        dim = int(first.split("=", 1)[1])
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = np.asarray([float(v) for v in line.split(",")], dtype=float)
            if row.size != dim:
                raise ValueError("row width disagrees with the dim header")
            points.append(row)
    return points


def points_to_json(points: Sequence[np.ndarray]) -> str:
    return json.dumps([list(map(float, p)) for p in points])


def points_from_json(text: str) -> list:
    return [np.asarray(row, dtype=float) for row in json.loads(text)]


def net_result_to_json(net: NetResult) -> str:
    payload = {
        "radius": net.radius,
        "centers": [list(map(float, c)) for c in net.centers],
        "covered_count": net.covered_count,
    }
    return json.dumps(payload)
