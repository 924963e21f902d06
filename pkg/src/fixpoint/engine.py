"""Fixed-point operators assembled from projectors, and trace recording.

Operators are evaluated two ways: :func:`apply` uses the deterministic
projection selection at every stage (what the iteration follows), while
:func:`candidates` enumerates the full multivalued image so that
:func:`residual_map` can take the infimum over it.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .geometry import (
    Lambda,
    SetSpec,
    Vector,
    WholeSpace,
    as_vector,
    distance,
    norm,
    project_all,
    project_one,
    sample_ball,
)


@dataclass(frozen=True, eq=False)
class AlternatingProjections:
    """T = P_A o P_B."""

    A: SetSpec
    B: SetSpec


@dataclass(frozen=True, eq=False)
class DouglasRachford:
    """T = (Id + R_A R_B) / 2 with reflectors R_C = 2 P_C - Id."""

    A: SetSpec
    B: SetSpec


@dataclass(frozen=True, eq=False)
class Projector:
    """T = P_S."""

    S: SetSpec


@dataclass(frozen=True, eq=False)
class Relaxation:
    """T = (1 - alpha) Id + alpha * inner, alpha in (0, 1)."""

    inner: "OperatorSpec"
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not 0.0 < a < 1.0:
            raise ValueError("relaxation parameter must lie in (0, 1)")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True, eq=False)
class Composition:
    """Stages applied left to right: T = stages[-1] o ... o stages[0]."""

    stages: tuple

    def __post_init__(self):
        st = tuple(self.stages)
        if not st:
            raise ValueError("composition needs at least one stage")
        object.__setattr__(self, "stages", st)


OperatorSpec = Union[
    AlternatingProjections, DouglasRachford, Projector, Relaxation, Composition
]


def apply(op: OperatorSpec, x) -> Vector:
    """Single-valued evaluation via the deterministic selection at each stage."""
    x = np.asarray(x, dtype=float)
    if isinstance(op, AlternatingProjections):
        return project_one(op.A, project_one(op.B, x))
    if isinstance(op, DouglasRachford):
        rb = 2.0 * project_one(op.B, x) - x
        ra = 2.0 * project_one(op.A, rb) - rb
        return 0.5 * (x + ra)
    if isinstance(op, Projector):
        return project_one(op.S, x)
    if isinstance(op, Relaxation):
        return (1.0 - op.alpha) * x + op.alpha * apply(op.inner, x)
    if isinstance(op, Composition):
        for stage in op.stages:
            x = apply(stage, x)
        return x
    raise TypeError(f"unknown operator: {type(op).__name__}")


def candidates(op: OperatorSpec, x) -> list[Vector]:
    """Full multivalued image Tx as a finite candidate list."""
    x = np.asarray(x, dtype=float)
    if isinstance(op, AlternatingProjections):
        out = []
        for b in project_all(op.B, x):
            out.extend(project_all(op.A, b))
        return _dedup(out)
    if isinstance(op, DouglasRachford):
        out = []
        for pb in project_all(op.B, x):
            rb = 2.0 * pb - x
            for pa in project_all(op.A, rb):
                out.append(0.5 * (x + 2.0 * pa - rb))
        return _dedup(out)
    if isinstance(op, Projector):
        return list(project_all(op.S, x))
    if isinstance(op, Relaxation):
        return _dedup(
            [(1.0 - op.alpha) * x + op.alpha * y for y in candidates(op.inner, x)]
        )
    if isinstance(op, Composition):
        pts = [x]
        for stage in op.stages:
            pts = _dedup([y for p in pts for y in candidates(stage, p)])
        return pts
    raise TypeError(f"unknown operator: {type(op).__name__}")


def _dedup(points: list[Vector], tol: float = 1e-12) -> list[Vector]:
    points = sorted(points, key=lambda p: tuple(p))
    out: list[Vector] = []
    for p in points:
        if out and norm(p - out[-1]) <= tol:
            continue
        out.append(p)
    return out


def residual_map(op: OperatorSpec, x) -> float:
    """dist(0, Tx - x): the infimum of ||x+ - x|| over the candidate image."""
    x = np.asarray(x, dtype=float)
    return min(norm(y - x) for y in candidates(op, x))


def principal_set(op: OperatorSpec) -> SetSpec | None:
    """The set used for the seed convention (iterates start on it)."""
    if isinstance(op, (AlternatingProjections, DouglasRachford)):
        return op.A
    if isinstance(op, Projector):
        return op.S
    if isinstance(op, Relaxation):
        return principal_set(op.inner)
    if isinstance(op, Composition):
        return principal_set(op.stages[0])
    return None


@dataclass
class IterationConfig:
    seed_point: Vector
    max_iter: int = 100_000
    residual_tol: float = 1e-12
    lam: Lambda | None = None
    record_joining: bool = True
    target: SetSpec | Sequence[Vector] | None = None

    def __post_init__(self):
        self.seed_point = as_vector(self.seed_point)
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be > 0")


@dataclass
class Trace:
    """Full iteration record of a fixed-point run."""

    x: list
    b: list
    z: list
    dist_A: list
    dist_B: list
    dist_target: list
    residual: list
    step_norm: list
    stop_reason: str
    metadata: dict = field(default_factory=dict)

    @property
    def limit(self) -> Vector:
        return self.x[-1]

    def to_json_dict(self) -> dict:
        return {
            "x": [[float(t) for t in p] for p in self.x],
            "b": [[float(t) for t in p] for p in self.b],
            "z": [[float(t) for t in p] for p in self.z],
            "dist_A": [float(t) for t in self.dist_A],
            "dist_B": [float(t) for t in self.dist_B],
            "dist_target": [float(t) for t in self.dist_target],
            "residual": [float(t) for t in self.residual],
            "step_norm": [float(t) for t in self.step_norm],
            "stop_reason": self.stop_reason,
            "metadata": self.metadata,
        }

    def to_csv_text(self) -> str:
        """CSV with one row per iterate; floats in shortest round-trip form."""
        dim = self.x[0].size
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["k"]
        head += [f"x_{i}" for i in range(dim)]
        head += [f"b_{i}" for i in range(dim)]
        head += ["dist_A", "dist_B", "dist_target", "step_norm", "residual"]
        w.writerow(head)
        for k, xk in enumerate(self.x):
            row = [str(k)] + [repr(float(t)) for t in xk]
            if k < len(self.b):
                row += [repr(float(t)) for t in self.b[k]]
            else:
                row += [""] * dim
            row += [
                repr(float(self.dist_A[k])),
                repr(float(self.dist_B[k])),
                repr(float(self.dist_target[k])),
                repr(float(self.step_norm[k])),
                repr(float(self.residual[k])),
            ]
            w.writerow(row)
        return buf.getvalue()


def _operator_sets(op: OperatorSpec) -> tuple[SetSpec | None, SetSpec | None]:
    if isinstance(op, (AlternatingProjections, DouglasRachford)):
        return op.A, op.B
    if isinstance(op, Projector):
        return op.S, None
    if isinstance(op, Relaxation):
        return _operator_sets(op.inner)
    if isinstance(op, Composition):
        return _operator_sets(op.stages[0])
    return None, None


def target_distance(x: Vector, target: SetSpec | Sequence[Vector] | None) -> float:
    if target is None:
        return math.nan
    if isinstance(target, SetSpec):
        return distance(target, x)
    return min(norm(x - np.asarray(p, dtype=float)) for p in target)


def run(op: OperatorSpec, cfg: IterationConfig) -> Trace:
    """Iterate x_{k+1} = T x_k until the residual drops below tolerance.

    The raw seed is projected onto the constraint set (if any) and then onto
    the operator's first set, so recorded iterates start on it; the raw seed
    is kept in the metadata.  For projection pairs the intermediate
    B-projections b_k and the joining sequence z (alternating x_k, b_k) are
    recorded as well.
    """
    A, B = _operator_sets(op)
    x0 = cfg.seed_point
    raw_seed = x0.copy()
    if cfg.lam is not None and not isinstance(cfg.lam, WholeSpace):
        x0 = project_one(cfg.lam, x0)
    if A is not None:
        x0 = project_one(A, x0)

    xs = [x0]
    residuals: list[float] = []
    stop_reason = "max_iter"
    x = x0
    for _ in range(cfg.max_iter):
        x_next = apply(op, x)
        r = norm(x_next - x)
        residuals.append(r)
        if r <= cfg.residual_tol:
            stop_reason = "fixed_point"
            break
        xs.append(x_next)
        x = x_next
    else:
        residuals.append(norm(apply(op, x) - x))

    record_b = isinstance(op, AlternatingProjections) and B is not None
    bs = [project_one(B, xk) for xk in xs] if record_b else []
    zs: list[Vector] = []
    if record_b and cfg.record_joining:
        for xk, bk in zip(xs, bs):
            zs.append(xk)
            zs.append(bk)

    target = cfg.target
    if target is None:
        target = [xs[-1]]
    dist_A = [distance(A, p) if A is not None else math.nan for p in xs]
    dist_B = [distance(B, p) if B is not None else math.nan for p in xs]
    dist_t = [target_distance(p, target) for p in xs]
    steps = [norm(xs[k + 1] - xs[k]) for k in range(len(xs) - 1)] + [0.0]

    return Trace(
        x=xs,
        b=bs,
        z=zs,
        dist_A=dist_A,
        dist_B=dist_B,
        dist_target=dist_t,
        residual=residuals,
        step_norm=steps,
        stop_reason=stop_reason,
        metadata={
            "raw_seed": [float(t) for t in raw_seed],
            "seed_point": [float(t) for t in x0],
            "operator": type(op).__name__,
        },
    )


def approximate_fix_set(
    op: OperatorSpec,
    center,
    radius: float,
    budget: int,
    lam: Lambda | None = None,
    seed: int = 0,
    residual_tol: float = 1e-9,
    cluster_tol: float = 1e-6,
    max_iter: int = 5000,
) -> list[Vector]:
    """Multi-start approximation of the fixed point set inside a ball.

    Runs the iteration from ``budget`` seeded starts and returns the
    deduplicated limit points whose residual (infimum over the multivalued
    image) is below tolerance.  This is a sampling certificate for the fixed
    point set, not the exact set; an empty result triggers a warning.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    center = as_vector(center)
    limits: list[Vector] = []
    for start in sample_ball(center, radius, budget, seed):
        if lam is not None and not isinstance(lam, WholeSpace):
            start = project_one(lam, start)
        x = start
        for _ in range(max_iter):
            x_next = apply(op, x)
            if norm(x_next - x) <= residual_tol * 1e-2:
                x = x_next
                break
            x = x_next
        if residual_map(op, x) <= residual_tol:
            limits.append(x)
    limits.sort(key=lambda p: tuple(p))
    out: list[Vector] = []
    for p in limits:
        if any(norm(p - q) <= cluster_tol for q in out):
            continue
        out.append(p)
    if not out:
        warnings.warn("no start converged within budget; fixed-point sample empty")
    return out


def trace_to_json_text(trace: Trace) -> str:
    return json.dumps(trace.to_json_dict(), sort_keys=True, indent=1)
