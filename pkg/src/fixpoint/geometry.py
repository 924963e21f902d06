"""Closed sets with exact distances and (possibly multivalued) projectors.

Every set variant enumerates a finite list of projection candidates, so
distances are exact up to floating point and projectors return *all*
minimizers (ties resolved deterministically).  Nonconvex variants (sphere,
finite point sets, general piecewise curves, unions) may return several
candidates; convex variants always return exactly one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

Vector = np.ndarray

#: absolute tolerance for membership tests and projection ties
MEMBERSHIP_TOL = 1e-9
TIE_TOL = 1e-9
_DEDUP_TOL = 1e-12


class DimensionMismatch(ValueError):
    """Query dimension does not match the set's ambient dimension."""


def as_vector(x, dim: int | None = None) -> Vector:
    """Coerce to a finite float64 vector, optionally checking the dimension."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d point, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"point has non-finite coordinates: {v}")
    if dim is not None and v.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.size}")
    return v


def norm(v) -> float:
    return float(np.linalg.norm(v))


class ProjectionList(list):
    """Projection candidates; ``infinite_fiber`` marks a non-enumerable fiber.

    The only variant with an infinite fiber is the sphere queried at its
    center, where the canonical representative ``center + r*e1`` is returned.
    """

    infinite_fiber: bool = False


class SetSpec:
    """Base class for set descriptions.  Subclasses are immutable values."""

    dim: int

    def _candidates(self, x: Vector) -> list[Vector]:
        raise NotImplementedError

    def _infinite_fiber(self, x: Vector) -> bool:
        return False

    def distance(self, x) -> float:
        return distance(self, x)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return distance(self, x) <= tol


# ---------------------------------------------------------------------------
# convex variants


@dataclass(frozen=True, eq=False)
class Halfspace(SetSpec):
    """{x : <normal, x> <= offset}."""

    normal: Vector
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal)
        if norm(n) == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.normal.size

    def _candidates(self, x):
        excess = float(self.normal @ x) - self.offset
        if excess <= 0.0:
            return [x.copy()]
        return [x - (excess / float(self.normal @ self.normal)) * self.normal]


@dataclass(frozen=True, eq=False)
class AffineSubspace(SetSpec):
    """point + span(basis) with an orthonormal basis (possibly empty)."""

    point: Vector
    basis: np.ndarray  # shape (k, dim), rows orthonormal

    def __post_init__(self):
        p = as_vector(self.point)
        b = np.asarray(self.basis, dtype=float).reshape(-1, p.size)
        if b.size and not np.allclose(b @ b.T, np.eye(b.shape[0]), atol=1e-9):
            raise ValueError("affine basis must be orthonormal")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.point.size

    def _candidates(self, x):
        d = x - self.point
        if self.basis.size == 0:
            return [self.point.copy()]
        return [self.point + self.basis.T @ (self.basis @ d)]


@dataclass(frozen=True, eq=False)
class Ball(SetSpec):
    center: Vector
    radius: float

    def __post_init__(self):
        c = as_vector(self.center)
        r = float(self.radius)
        if r < 0:
            raise ValueError("ball radius must be >= 0")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def _candidates(self, x):
        u = x - self.center
        nu = norm(u)
        if nu <= self.radius:
            return [x.copy()]
        return [self.center + (self.radius / nu) * u]


@dataclass(frozen=True, eq=False)
class Box(SetSpec):
    lo: Vector
    hi: Vector

    def __post_init__(self):
        lo = as_vector(self.lo)
        hi = as_vector(self.hi, lo.size)
        if np.any(lo > hi):
            raise ValueError("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def _candidates(self, x):
        return [np.clip(x, self.lo, self.hi)]


@dataclass(frozen=True, eq=False)
class WholeSpace(SetSpec):
    space_dim: int

    def __post_init__(self):
        object.__setattr__(self, "space_dim", int(self.space_dim))

    @property
    def dim(self) -> int:
        return self.space_dim

    def _candidates(self, x):
        return [x.copy()]


# ---------------------------------------------------------------------------
# nonconvex variants


@dataclass(frozen=True, eq=False)
class Sphere(SetSpec):
    """{x : ||x - center|| = radius}, radius > 0.  Nonconvex."""

    center: Vector
    radius: float

    def __post_init__(self):
        c = as_vector(self.center)
        r = float(self.radius)
        if r <= 0:
            raise ValueError("sphere radius must be > 0")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def _candidates(self, x):
        u = x - self.center
        nu = norm(u)
        if nu < 1e-15 * max(1.0, self.radius):
            # entire fiber projects; canonical representative along e1
            e1 = np.zeros(self.dim)
            e1[0] = self.radius
            return [self.center + e1]
        return [self.center + (self.radius / nu) * u]

    def _infinite_fiber(self, x):
        return norm(x - self.center) < 1e-15 * max(1.0, self.radius)


@dataclass(frozen=True, eq=False)
class FinitePointSet(SetSpec):
    points: np.ndarray  # shape (n, dim)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.shape[0] == 0:
            raise ValueError("finite point set must be nonempty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("finite point set has non-finite coordinates")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def _candidates(self, x):
        return [p.copy() for p in self.points]


@dataclass(frozen=True, eq=False)
class LinearPiece:
    """Segment from start to end in R^2."""

    start: Vector
    end: Vector

    def __post_init__(self):
        object.__setattr__(self, "start", as_vector(self.start, 2))
        object.__setattr__(self, "end", as_vector(self.end, 2))

    def candidates(self, q: Vector) -> list[Vector]:
        d = self.end - self.start
        dd = float(d @ d)
        if dd < 1e-30:
            return [self.start.copy()]
        t = float((q - self.start) @ d) / dd
        t = min(1.0, max(0.0, t))
        return [self.start + t * d]


@dataclass(frozen=True, eq=False)
class ParabolicPiece:
    """Graph arc {(t, a t^2 + b t + c) : t in [t0, t1]} in R^2."""

    a: float
    b: float
    c: float
    t0: float
    t1: float

    def __post_init__(self):
        for f in ("a", "b", "c", "t0", "t1"):
            object.__setattr__(self, f, float(getattr(self, f)))
        if not self.t0 <= self.t1:
            raise ValueError("parabolic piece needs t0 <= t1")

    def value(self, t: float) -> float:
        return (self.a * t + self.b) * t + self.c

    def candidates(self, q: Vector) -> list[Vector]:
        ts = _parabola_stationary_points(
            self.a, self.b, self.c, self.t0, self.t1, q
        )
        for t in (self.t0, self.t1):
            if math.isfinite(t):
                ts.append(t)
        return [np.array([t, self.value(t)]) for t in ts]


def _parabola_stationary_points(a, b, c, t0, t1, q) -> list[float]:
    """Interior roots of d/dt |(t, at^2+bt+c) - q|^2 = 0, Newton-polished.

    The stationarity condition is the cubic
        2a^2 t^3 + 3ab t^2 + (b^2 + 2a(c-y) + 1) t + (b(c-y) - x) = 0.
    Roots come from the companion matrix; each real root inside (t0, t1)
    is polished by a few safeguarded Newton steps.
    """
    x, y = float(q[0]), float(q[1])
    if a == 0.0:
        # degenerate piece: foot of the perpendicular on the line y = bt + c
        t = (x + b * (y - c)) / (1.0 + b * b)
        return [t] if t0 < t < t1 else []
    coeffs = [2 * a * a, 3 * a * b, b * b + 2 * a * (c - y) + 1.0, b * (c - y) - x]
    roots = np.roots(coeffs)
    out: list[float] = []
    for r in roots:
        if abs(r.imag) > 1e-8 * max(1.0, abs(r.real)):
            continue
        t = float(r.real)
        if not (t0 - 1e-12 < t < t1 + 1e-12):
            continue
        for _ in range(3):  # polish; derivative of the cubic
            g = ((t - x) + (a * t * t + b * t + c - y) * (2 * a * t + b))
            dg = 1.0 + (2 * a * t + b) ** 2 + 2 * a * (a * t * t + b * t + c - y)
            if dg == 0.0:
                break
            t_new = t - g / dg
            if not (t0 - 1e-9 <= t_new <= t1 + 1e-9):
                break
            t = t_new
        out.append(min(max(t, t0), t1) if math.isfinite(t0) else t)
    return out


CurvePiece = Union[LinearPiece, ParabolicPiece]


@dataclass(frozen=True, eq=False)
class PiecewiseCurve(SetSpec):
    """A curve in R^2 given as a list of linear or parabolic pieces."""

    pieces: tuple

    def __post_init__(self):
        ps = tuple(self.pieces)
        if not ps:
            raise ValueError("piecewise curve needs at least one piece")
        object.__setattr__(self, "pieces", ps)
        # vectorized segment data for the linear pieces (hot path)
        lin = [p for p in ps if isinstance(p, LinearPiece)]
        starts = np.array([p.start for p in lin]).reshape(-1, 2)
        ends = np.array([p.end for p in lin]).reshape(-1, 2)
        d = ends - starts
        dd = np.maximum(np.einsum("ij,ij->i", d, d), 1e-300)
        object.__setattr__(self, "_lin_starts", starts)
        object.__setattr__(self, "_lin_d", d)
        object.__setattr__(self, "_lin_dd", dd)
        object.__setattr__(
            self, "_par", [p for p in ps if isinstance(p, ParabolicPiece)]
        )

    @property
    def dim(self) -> int:
        return 2

    def _linear_feet(self, x) -> np.ndarray:
        t = np.einsum("ij,ij->i", x - self._lin_starts, self._lin_d) / self._lin_dd
        np.clip(t, 0.0, 1.0, out=t)
        return self._lin_starts + t[:, None] * self._lin_d

    def _candidates(self, x):
        out = list(self._linear_feet(x)) if len(self._lin_starts) else []
        for p in self._par:
            out.extend(p.candidates(x))
        return out


@dataclass(frozen=True, eq=False)
class Epigraph(SetSpec):
    """Epigraph {(t, y) : y >= f(t)} of a piecewise linear/quadratic f.

    ``breakpoints`` splits the real line into len(breakpoints)+1 intervals;
    ``pieces[i]`` holds quadratic coefficients (a, b, c) with
    f(t) = a t^2 + b t + c on the i-th interval.
    """

    breakpoints: Vector
    pieces: np.ndarray  # shape (len(breakpoints)+1, 3)
    convex: bool = True

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        pc = np.asarray(self.pieces, dtype=float).reshape(-1, 3)
        if pc.shape[0] != bp.size + 1:
            raise ValueError("need len(breakpoints)+1 coefficient triples")
        if bp.size > 1 and np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", pc)
        object.__setattr__(self, "convex", bool(self.convex))

    @property
    def dim(self) -> int:
        return 2

    def value(self, t: float) -> float:
        i = int(np.searchsorted(self.breakpoints, t, side="right"))
        a, b, c = self.pieces[i]
        return (a * t + b) * t + c

    def _piece_interval(self, i: int) -> tuple[float, float]:
        lo = -math.inf if i == 0 else float(self.breakpoints[i - 1])
        hi = math.inf if i == len(self.breakpoints) else float(self.breakpoints[i])
        return lo, hi

    def _candidates(self, x):
        t, y = float(x[0]), float(x[1])
        if y >= self.value(t):
            return [x.copy()]
        out = []
        for i, (a, b, c) in enumerate(self.pieces):
            lo, hi = self._piece_interval(i)
            ts = _parabola_stationary_points(a, b, c, lo, hi, x)
            for e in (lo, hi):
                if math.isfinite(e):
                    ts.append(e)
            out.extend(np.array([s, (a * s + b) * s + c]) for s in ts)
        # vertical boundary segments where f jumps at a breakpoint
        for i, bp in enumerate(self.breakpoints):
            a0, b0, c0 = self.pieces[i]
            a1, b1, c1 = self.pieces[i + 1]
            v0 = (a0 * bp + b0) * bp + c0
            v1 = (a1 * bp + b1) * bp + c1
            if abs(v0 - v1) > 1e-15:
                seg = LinearPiece((bp, min(v0, v1)), (bp, max(v0, v1)))
                out.extend(seg.candidates(x))
        return out


@dataclass(frozen=True, eq=False)
class SetUnion(SetSpec):
    """Union of member sets; multivalued projector on ties."""

    members: tuple

    def __post_init__(self):
        ms = tuple(self.members)
        if not ms:
            raise ValueError("union needs at least one member")
        dims = {m.dim for m in ms}
        if len(dims) != 1:
            raise ValueError("union members must share a dimension")
        object.__setattr__(self, "members", ms)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def _candidates(self, x):
        dists = [distance(m, x) for m in self.members]
        dmin = min(dists)
        out = []
        for m, d in zip(self.members, dists):
            if d <= dmin + TIE_TOL:
                out.extend(m._candidates(x))
        return out

    def _infinite_fiber(self, x):
        dists = [distance(m, x) for m in self.members]
        dmin = min(dists)
        return any(
            d <= dmin + TIE_TOL and m._infinite_fiber(x)
            for m, d in zip(self.members, dists)
        )


Lambda = Union[WholeSpace, AffineSubspace]

_CONVEX_TYPES = (Halfspace, AffineSubspace, Ball, Box, WholeSpace)


def is_convex(s: SetSpec) -> bool:
    """True when the variant has a single-valued projector everywhere."""
    if isinstance(s, _CONVEX_TYPES):
        return True
    if isinstance(s, Epigraph):
        return s.convex
    if isinstance(s, PiecewiseCurve):
        return len(s.pieces) == 1 and isinstance(s.pieces[0], LinearPiece)
    return False


# ---------------------------------------------------------------------------
# core operations


def _check_dim(s: SetSpec, x) -> Vector:
    return as_vector(x, s.dim)


def distance(s: SetSpec, x) -> float:
    """Euclidean distance from x to s (exact; 0 iff x lies in s)."""
    x = _check_dim(s, x)
    if isinstance(s, Halfspace):
        return max(0.0, (float(s.normal @ x) - s.offset) / norm(s.normal))
    if isinstance(s, Ball):
        return max(0.0, norm(x - s.center) - s.radius)
    if isinstance(s, Sphere):
        return abs(norm(x - s.center) - s.radius)
    if isinstance(s, Box):
        return norm(x - np.clip(x, s.lo, s.hi))
    if isinstance(s, WholeSpace):
        return 0.0
    if isinstance(s, FinitePointSet):
        return float(np.min(np.linalg.norm(s.points - x, axis=1)))
    if isinstance(s, SetUnion):
        return min(distance(m, x) for m in s.members)
    cands = s._candidates(x)
    return float(np.min(np.linalg.norm(np.asarray(cands) - x, axis=1)))


def project_all(s: SetSpec, x) -> ProjectionList:
    """All nearest points of s to x, deduplicated, in lexicographic order.

    Candidates within TIE_TOL of the minimal distance are all returned.
    """
    x = _check_dim(s, x)
    cands = s._candidates(x)
    if len(cands) == 1:
        out = ProjectionList(cands)
        out.infinite_fiber = s._infinite_fiber(x)
        return out
    dists = np.linalg.norm(np.asarray(cands) - x, axis=1)
    dmin = float(np.min(dists))
    keep = [p for p, d in zip(cands, dists) if d <= dmin + TIE_TOL]
    keep.sort(key=lambda p: tuple(p))
    out = ProjectionList()
    for p in keep:
        if out and norm(p - out[-1]) <= max(_DEDUP_TOL, TIE_TOL * 1e-2):
            continue
        out.append(p)
    out.infinite_fiber = s._infinite_fiber(x)
    return out


def project_one(s: SetSpec, x) -> Vector:
    """Deterministic selection: the lexicographically smallest projection."""
    x = _check_dim(s, x)
    if isinstance(s, _CONVEX_TYPES):
        return s._candidates(x)[0]
    cands = s._candidates(x)
    if len(cands) == 1:
        return cands[0]
    dists = np.linalg.norm(np.asarray(cands) - x, axis=1)
    dmin = float(np.min(dists))
    best = None
    for p, d in zip(cands, dists):
        if d <= dmin + TIE_TOL and (best is None or tuple(p) < tuple(best)):
            best = p
    return best


@dataclass(frozen=True, eq=False)
class NormalPair:
    """A base point of the set together with a proximal normal direction."""

    base: Vector
    direction: Vector


def proximal_normal(s: SetSpec, w, tol: float = MEMBERSHIP_TOL) -> NormalPair:
    """Proximal normal at the projection of an outside query w.

    Returns (a, v) with a the deterministic projection of w and v = w - a,
    so a + v projects back onto a.  Raises for queries already in the set,
    where no canonical nonzero proximal normal exists.
    """
    w = _check_dim(s, w)
    if distance(s, w) <= tol:
        raise ValueError("query lies in the set; no canonical proximal normal")
    a = project_one(s, w)
    return NormalPair(a, w - a)


def elemental_subreg_estimate(
    s: SetSpec,
    sample: Sequence[Vector],
    pair: NormalPair,
    center,
    delta: float,
    polish: bool = True,
) -> float:
    """Sampled constant of the one-sided normal-angle condition.

    Over set points x in the ball B_delta(center), estimates
        max(0, sup <v, x - a> / (||v|| ||x - a||))
    for the normal pair (a, v).  The result is a lower bound on the true
    constant for that neighborhood; refinement never decreases it.
    """
    center = _check_dim(s, center)
    a, v = pair.base, pair.direction
    nv = norm(v)
    if nv <= 0:
        raise ValueError("normal direction must be nonzero")
    # rounding in <v, x-a> scales with the coordinate magnitudes; dividing by
    # ||x-a|| amplifies it near the base point.  Subtracting this first-order
    # bound keeps the estimate a lower bound instead of reporting noise.
    scale = 8.0 * a.size * np.finfo(float).eps * max(1.0, norm(a) + abs(nv))

    def ratio(x: Vector) -> float:
        dx = x - a
        nd = norm(dx)
        if nd <= 1e-14:
            return -math.inf
        return float(v @ dx) / (nv * nd) - scale * max(1.0, norm(x)) / nd

    pts = [p for p in sample if norm(p - center) <= delta + 1e-12]
    vals = [ratio(p) for p in pts]
    vals = [t for t in vals if t > -math.inf]
    if not vals:
        raise ValueError("empty sample after filtering the base point")
    best = max(vals)
    if polish:
        def feasible(y: Vector) -> Vector | None:
            p = project_one(s, y)
            if norm(p - center) > delta:
                return None
            return p

        for p in pts[:32]:  # fixed index prefix: refinement stays monotone
            best = max(best, pattern_polish(p, ratio, feasible, step=delta / 4)[0])
    return max(0.0, best)


# ---------------------------------------------------------------------------
# seeded sampling and deterministic polish


def ball_point(center, radius: float, seed: int, index: int) -> Vector:
    """The index-th point of the seeded uniform stream on a closed ball.

    Each index owns its own generator, so the first n points of a stream are
    a prefix of the first 2n: supremum estimates can only grow on refinement.
    """
    center = as_vector(center)
    rng = np.random.default_rng([int(seed), int(index)])
    u = rng.standard_normal(center.size)
    nu = norm(u)
    if nu == 0.0:
        u[0] = 1.0
        nu = 1.0
    r = radius * rng.random() ** (1.0 / center.size)
    return center + (r / nu) * u


def sample_ball(center, radius: float, count: int, seed: int) -> list[Vector]:
    return [ball_point(center, radius, seed, i) for i in range(count)]


def sample_on_set(
    s: SetSpec,
    center,
    radius: float,
    count: int,
    seed: int,
    lam: Lambda | None = None,
) -> list[Vector]:
    """Points of s (optionally of s ∩ lam) inside the ball B_radius(center).

    Ambient ball samples are projected onto the set; with an affine
    constraint a few alternating projections land the point in both sets.
    Samples whose projection escapes the ball are dropped.
    """
    center = _check_dim(s, center)
    out = []
    for i in range(count):
        p = project_one(s, ball_point(center, radius, seed, i))
        if lam is not None and not isinstance(lam, WholeSpace):
            for _ in range(40):
                q = project_one(lam, p)
                p = project_one(s, q)
                if norm(p - q) <= 1e-12:
                    break
            if distance(lam, p) > 1e-9:
                continue
        if norm(p - center) <= radius + 1e-12:
            out.append(p)
    return out


_POLISH_DIRS: dict[int, np.ndarray] = {}


def _polish_directions(d: int) -> np.ndarray:
    if d not in _POLISH_DIRS:
        dirs = list(np.eye(d)) + list(-np.eye(d))
        if d <= 3:  # diagonal moves cross kinks of max-type objectives
            for i in range(d):
                for j in range(i + 1, d):
                    for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                        v = np.zeros(d)
                        v[i], v[j] = si, sj
                        dirs.append(v / math.sqrt(2.0))
        _POLISH_DIRS[d] = np.array(dirs)
    return _POLISH_DIRS[d]


def pattern_polish(
    x0: Vector,
    score,
    feasible,
    step: float,
    max_rounds: int = 48,
    floor: float = 1e-9,
) -> tuple[float, Vector]:
    """Deterministic pattern ascent of score over feasible points.

    ``feasible`` maps a trial point into the admissible region (or returns
    None to reject it).  Depends only on the starting point, so per-sample
    polishing keeps nested-sample estimates monotone under refinement.
    Returns the best score and the point attaining it.
    """
    x = feasible(np.asarray(x0, dtype=float))
    if x is None:
        return -math.inf, np.asarray(x0, dtype=float)
    best = score(x)
    dirs = _polish_directions(x.size)
    for _ in range(max_rounds):
        improved = False
        for d in dirs:
            y = feasible(x + step * d)
            if y is None:
                continue
            sy = score(y)
            if sy > best + 1e-15:
                x, best = y, sy
                improved = True
        if not improved:
            step *= 0.5
            if step < floor:
                break
    return best, x


# ---------------------------------------------------------------------------
# JSON wire format


def _vec_list(v) -> list:
    return [float(t) for t in np.asarray(v).reshape(-1)]


def set_to_json(s: SetSpec) -> dict:
    """Serialize a set description to its JSON object form."""
    if isinstance(s, Halfspace):
        return {"variant": "halfspace", "normal": _vec_list(s.normal), "offset": s.offset}
    if isinstance(s, AffineSubspace):
        return {
            "variant": "affine_subspace",
            "point": _vec_list(s.point),
            "basis": [_vec_list(b) for b in s.basis],
        }
    if isinstance(s, Ball):
        return {"variant": "ball", "center": _vec_list(s.center), "radius": s.radius}
    if isinstance(s, Box):
        return {"variant": "box", "lo": _vec_list(s.lo), "hi": _vec_list(s.hi)}
    if isinstance(s, Sphere):
        return {"variant": "sphere", "center": _vec_list(s.center), "radius": s.radius}
    if isinstance(s, FinitePointSet):
        return {"variant": "finite_point_set", "points": [_vec_list(p) for p in s.points]}
    if isinstance(s, PiecewiseCurve):
        pieces = []
        for p in s.pieces:
            if isinstance(p, LinearPiece):
                pieces.append({"kind": "linear", "start": _vec_list(p.start), "end": _vec_list(p.end)})
            else:
                pieces.append({"kind": "parabolic", "a": p.a, "b": p.b, "c": p.c, "t0": p.t0, "t1": p.t1})
        return {"variant": "piecewise_curve", "pieces": pieces}
    if isinstance(s, Epigraph):
        return {
            "variant": "epigraph",
            "breakpoints": _vec_list(s.breakpoints),
            "pieces": [_vec_list(p) for p in s.pieces],
            "convex": s.convex,
        }
    if isinstance(s, SetUnion):
        return {"variant": "union", "members": [set_to_json(m) for m in s.members]}
    if isinstance(s, WholeSpace):
        return {"variant": "whole_space", "dim": s.space_dim}
    raise TypeError(f"unknown set variant: {type(s).__name__}")


def set_from_json(obj: dict) -> SetSpec:
    """Inverse of :func:`set_to_json`; rejects unknown variants and keys."""
    if not isinstance(obj, dict) or "variant" not in obj:
        raise ValueError("set description must be an object with a 'variant' key")
    kind = obj["variant"]
    rest = {k: v for k, v in obj.items() if k != "variant"}

    def take(*keys, optional=()):
        unknown = set(rest) - set(keys) - set(optional)
        if unknown:
            raise ValueError(f"unknown keys for {kind}: {sorted(unknown)}")
        missing = [k for k in keys if k not in rest]
        if missing:
            raise ValueError(f"missing keys for {kind}: {missing}")

    if kind == "halfspace":
        take("normal", "offset")
        return Halfspace(rest["normal"], rest["offset"])
    if kind == "affine_subspace":
        take("point", "basis")
        return AffineSubspace(rest["point"], rest["basis"])
    if kind == "ball":
        take("center", "radius")
        return Ball(rest["center"], rest["radius"])
    if kind == "box":
        take("lo", "hi")
        return Box(rest["lo"], rest["hi"])
    if kind == "sphere":
        take("center", "radius")
        return Sphere(rest["center"], rest["radius"])
    if kind == "finite_point_set":
        take("points")
        return FinitePointSet(rest["points"])
    if kind == "piecewise_curve":
        take("pieces")
        pieces = []
        for p in rest["pieces"]:
            if p.get("kind") == "linear":
                pieces.append(LinearPiece(p["start"], p["end"]))
            elif p.get("kind") == "parabolic":
                pieces.append(ParabolicPiece(p["a"], p["b"], p["c"], p["t0"], p["t1"]))
            else:
                raise ValueError(f"unknown curve piece kind: {p.get('kind')}")
        return PiecewiseCurve(tuple(pieces))
    if kind == "epigraph":
        take("breakpoints", "pieces", optional=("convex",))
        return Epigraph(rest["breakpoints"], rest["pieces"], rest.get("convex", True))
    if kind == "union":
        take("members")
        return SetUnion(tuple(set_from_json(m) for m in rest["members"]))
    if kind == "whole_space":
        take("dim")
        return WholeSpace(rest["dim"])
    raise ValueError(f"unknown set variant: {kind}")
