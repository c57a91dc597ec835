"""Flat-profile smoothing: the step function h, radius fields, tube maps.

The profile h(t) = t*g(t) with g(t) = e(t)/(e(t)+e(1-t)), e(t) = exp(-1/t)
for t > 0 and 0 otherwise, is flat at 0, strictly increasing, and equals t
from 1 on. Each level-i face of the chamber carries a tube of radius l_i
(slope-limited by the distance to lower faces); inside the tube the map
F_i(x + t v) = x + l_i(x) h(t / l_i(x)) v crushes all normal derivatives at
the face while staying the identity outside. Composing wall maps first and
the radial map last gives G; precomposing with the fold gives the smooth
invariant map H.

Derivatives of h are evaluated through truncated Taylor jets: a jet holds
coefficients c_k = f^(k)(t)/k!, products are convolutions, and exp/divide
have short recurrences. Below t ~ 1.3e-3 the factor exp(-1/t) underflows,
so h is *numerically* exactly flat there; the code leans on that instead of
fighting it.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable

import numpy as np

from .chamber import (
    ON_WALL_TOL,
    Chamber,
    Face,
    Stratification,
    _fold_image,
    chamber_from_group,
    classify,
    dist_to_face,
    strata_levels,
)
from .groups import ReflectionGroup, essential_split

ARG_DEAD_EPS = 1e-8      # below this (or within it of 1) the jet is replaced
CHAMBER_REL_TOL = 1e-9   # apply_G membership tolerance


class TubeConfigError(ValueError):
    """Tube parameters violate the geometric disjointness bound."""


# ---------------------------------------------------------------------------
# Taylor jets for h
# ---------------------------------------------------------------------------

def _jet_mul(a: list[float], b: list[float]) -> list[float]:
    m = len(a)
    out = [0.0] * m
    for i, ai in enumerate(a):
        if ai == 0.0:
            continue
        for j in range(m - i):
            out[i + j] += ai * b[j]
    return out


def _jet_div(a: list[float], b: list[float]) -> list[float]:
    m = len(a)
    out = [0.0] * m
    out[0] = a[0] / b[0]
    for k in range(1, m):
        s = a[k]
        for j in range(1, k + 1):
            s -= b[j] * out[k - j]
        out[k] = s / b[0]
    return out


def _jet_exp(a: list[float]) -> list[float]:
    m = len(a)
    out = [0.0] * m
    out[0] = math.exp(a[0])
    for k in range(1, m):
        s = 0.0
        for j in range(1, k + 1):
            s += j * a[j] * out[k - j]
        out[k] = s / k
    return out


def _jet_e(t: float, order: int) -> list[float]:
    """Jet of e(t) = exp(-1/t) at t > 0 (zero jet once exp underflows)."""
    if t <= ARG_DEAD_EPS:
        return [0.0] * (order + 1)
    w = [-1.0 / t]
    for j in range(1, order + 1):
        w.append((-1.0) ** (j + 1) * t ** (-(j + 1)))
    return _jet_exp(w)


def _jet_e_reflected(t: float, order: int) -> list[float]:
    """Jet in t of e(1 - t): reflect the jet of e at 1 - t."""
    inner = _jet_e(1.0 - t, order)
    return [(-1.0) ** k * c for k, c in enumerate(inner)]


def _g0(t: float) -> float:
    """The smooth step g(t) = e(t)/(e(t)+e(1-t)) as a bare scalar."""
    if t <= ARG_DEAD_EPS:
        return 0.0
    if t >= 1.0 - ARG_DEAD_EPS:
        return 1.0
    u = math.exp(-1.0 / t)
    v = math.exp(-1.0 / (1.0 - t))
    return u / (u + v)


@dataclasses.dataclass(frozen=True)
class SmoothProfile:
    """The fixed flat-step profile h(t) = t*g(t); derivatives up to order 4."""

    derivative_order_max: int = 4


def eval_h(profile: SmoothProfile, t: float, order: int = 0) -> float:
    """h or an analytic derivative of it: h^(order)(t).

    Zero at and near 0 (flat), exactly t from 1 on, jets in between.
    """
    t = float(t)
    if not t >= 0.0:
        raise ValueError("h is only evaluated at t >= 0")
    if not 0 <= order <= profile.derivative_order_max:
        raise ValueError(
            f"order {order} outside supported range 0..{profile.derivative_order_max}")
    if t <= ARG_DEAD_EPS:
        return 0.0
    if t >= 1.0 - ARG_DEAD_EPS:
        if order == 0:
            return t
        return 1.0 if order == 1 else 0.0
    if order == 0:
        return t * _g0(t)
    et = _jet_e(t, order)
    er = _jet_e_reflected(t, order)
    den = [x + y for x, y in zip(et, er)]
    g = _jet_div(et, den)
    h = _jet_mul(g, [t, 1.0] + [0.0] * (order - 1))
    return h[order] * math.factorial(order)


# ---------------------------------------------------------------------------
# tube radii
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class TubeSpec:
    """Per-level radius parameters: l_i = cap-blend of b_i * softmin of
    distances to lower faces against c_i; level 0 uses the constant c0."""

    b: dict[int, float]          # slope per level 1..rank-1
    c: dict[int, float]          # cap per level 1..rank-1
    c0: float = 1.0
    softmin_exponent: int = 4

    def __post_init__(self) -> None:
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.softmin_exponent < 1:
            raise ValueError("softmin exponent must be >= 1")
        for d, label in ((self.b, "b"), (self.c, "c")):
            for i, val in d.items():
                if val <= 0:
                    raise ValueError(f"{label}_{i} must be positive, got {val}")

    def bounds_for(self, i: int, lower_face_count: int) -> tuple[float, float]:
        """Two-sided linear bounds (A_i, B_i) on l_i in the distance d."""
        b = self.b[i]
        return b * lower_face_count ** (-1.0 / self.softmin_exponent), b


def minimal_wall_angle(group: ReflectionGroup) -> tuple[float, tuple[int, int] | None]:
    """Smallest dihedral angle between any two mirrors, with the pair."""
    best = math.pi / 2.0
    pair = None
    mirrors = group.mirrors
    for i in range(len(mirrors)):
        for j in range(i + 1, len(mirrors)):
            c = abs(float(mirrors[i].normal @ mirrors[j].normal))
            ang = math.acos(min(c, 1.0))
            ang = min(ang, math.pi - ang)
            if ang < best:
                best, pair = ang, (i, j)
    return best, pair


def default_tubes(group: ReflectionGroup) -> TubeSpec:
    theta, _ = minimal_wall_angle(group)
    slope = min(0.1, math.sin(theta) / 4.0)
    levels = range(1, group.essential_rank)
    return TubeSpec(b={i: slope for i in levels}, c={i: 1.0 for i in levels})


def softmin(distances: Iterable[float], k: int) -> float:
    """(sum d_j^-k)^(-1/k): smooth, positive, below min, equal for one arg."""
    acc = 0.0
    for d in distances:
        if d <= 0.0:
            raise ValueError("softmin needs strictly positive distances")
        acc += d ** (-float(k))
    if acc == 0.0:
        raise ValueError("softmin needs at least one distance")
    return acc ** (-1.0 / k)


# ---------------------------------------------------------------------------
# the chain
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class TubeCoords:
    """Location of a point inside one tube: foot, unit normal, height.

    normal is None exactly when the point sits on the face (t == 0).
    """

    face: Face
    foot: np.ndarray
    normal: np.ndarray | None
    t: float
    radius: float

    @property
    def on_stratum(self) -> bool:
        return self.t == 0.0


@dataclasses.dataclass(frozen=True, eq=False)
class SmoothChain:
    group: ReflectionGroup
    chamber: Chamber
    stratification: Stratification
    profile: SmoothProfile
    tubes: TubeSpec

    @property
    def rank(self) -> int:
        return self.group.essential_rank

    def lower_faces(self, level: int) -> list[Face]:
        return [f for f in self.stratification.faces if f.level < level]


def build_chain(
    group: ReflectionGroup,
    chamber: Chamber | None = None,
    profile: SmoothProfile | None = None,
    tubes: TubeSpec | None = None,
) -> SmoothChain:
    """Assemble the smoothing chain; parameters default to the safe preset."""
    if chamber is None:
        chamber = chamber_from_group(group)
    if profile is None:
        profile = SmoothProfile()
    if tubes is None:
        tubes = default_tubes(group)
    for i in range(1, group.essential_rank):
        if i not in tubes.b or i not in tubes.c:
            raise ValueError(f"tube parameters missing for level {i}")
    strat = strata_levels(group, chamber)
    return SmoothChain(
        group=group, chamber=chamber, stratification=strat,
        profile=profile, tubes=tubes,
    )


def _radius_at(chain: SmoothChain, face: Face, x: np.ndarray) -> float:
    """l_i at a point of the open level-i face (no membership re-check)."""
    i = face.level
    if i == 0:
        return chain.tubes.c0
    k = chain.tubes.softmin_exponent
    dists = [dist_to_face(chain.stratification, f, x) for f in chain.lower_faces(i)]
    raw = chain.tubes.b[i] * softmin(dists, k)
    cap = chain.tubes.c[i]
    ratio = raw / cap
    if ratio <= 1.0:
        return raw
    if ratio >= 2.0:
        return cap
    w = _g0(ratio - 1.0)
    return (1.0 - w) * raw + w * cap


def eval_l(chain: SmoothChain, i: int, x: Iterable[float]) -> float:
    """Tube radius of level i at a point x of a level-i face."""
    x = np.asarray(x, dtype=float)
    desc = classify(chain.group, x)
    if desc.level != i:
        raise ValueError(f"point classifies to level {desc.level}, not {i}")
    if i == 0:
        return chain.tubes.c0
    for face in chain.stratification.faces_at_level(i):
        if chain.stratification.face_contains(face, x):
            return _radius_at(chain, face, x)
    raise ValueError(f"point is not on any level-{i} chamber face")


def _claiming_faces(chain: SmoothChain, i: int, p: np.ndarray) -> list[TubeCoords]:
    """Tube coordinates of p with respect to every level-i tube that holds it."""
    hits = []
    for face in chain.stratification.faces_at_level(i):
        x = face.project_to_span(p)
        if face.inactive:
            vals = chain.chamber.simple_normals[list(face.inactive)] @ x
            # the open-face test carries the classification fuzz: feet within
            # it of the boundary belong to lower strata, and admitting them
            # would feed (numerically) zero distances to the radius field
            if float(np.min(vals)) <= ON_WALL_TOL * (1.0 + float(np.linalg.norm(x))):
                continue
        t = float(np.linalg.norm(p - x))
        radius = _radius_at(chain, face, x)
        if t >= radius:
            continue
        normal = (p - x) / t if t > 0.0 else None
        hits.append(TubeCoords(face=face, foot=x, normal=normal, t=t, radius=radius))
    return hits


def tube_coords(chain: SmoothChain, i: int, p: Iterable[float]) -> TubeCoords | None:
    """Foot/normal/height of p inside the level-i tube, or None outside.

    The foot must land in the open face and the height must be under the
    local radius; t = 0 flags the on-stratum case with normal = None.
    """
    p = np.asarray(p, dtype=float)
    hits = _claiming_faces(chain, i, p)
    return hits[0] if hits else None


def apply_F(chain: SmoothChain, i: int, p: Iterable[float]) -> np.ndarray:
    """One tube map: radial reparametrization by h inside, identity outside."""
    p = np.asarray(p, dtype=float)
    tc = tube_coords(chain, i, p)
    if tc is None or tc.t == 0.0:
        return p.copy()
    u = tc.t / tc.radius
    return tc.foot + (tc.radius * eval_h(chain.profile, u, 0)) * tc.normal


def apply_partial(chain: SmoothChain, i: int, p: Iterable[float]) -> np.ndarray:
    """The partial composite: F_{n-1} first, descending to F_i last."""
    q = np.asarray(p, dtype=float)
    for j in range(chain.rank - 1, i - 1, -1):
        q = apply_F(chain, j, q)
    return q


def apply_G(chain: SmoothChain, p: Iterable[float]) -> np.ndarray:
    """Full composite on the closed chamber (walls first, origin last)."""
    p = np.asarray(p, dtype=float)
    scale = 1.0 + float(np.linalg.norm(p))
    if float(np.min(chain.chamber.simple_normals @ p)) < -CHAMBER_REL_TOL * scale:
        raise ValueError("point lies outside the closed chamber")
    return apply_partial(chain, 0, p)


def apply_H(chain: SmoothChain, p: Iterable[float]) -> np.ndarray:
    """The invariant map: fold into the chamber, then smooth."""
    p = np.asarray(p, dtype=float)
    image, _ = _fold_image(chain.chamber.simple_normals, p, chain.group.order)
    return apply_partial(chain, 0, image)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class TubeReport:
    theta_min: float | None
    slope_margins: dict[int, float]    # bound minus configured slope
    tube_points_checked: int
    disjoint: bool
    feet_unique: bool

    @property
    def ok(self) -> bool:
        return self.disjoint and self.feet_unique


def _normal_space_directions(face: Face, dim: int, rng: np.random.Generator,
                             count: int) -> list[np.ndarray]:
    """Random unit vectors orthogonal to the face span."""
    basis = face.basis
    out = []
    for _ in range(count * 4):
        v = rng.normal(size=dim)
        v = v - basis @ (basis.T @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            out.append(v / norm)
        if len(out) == count:
            break
    return out


def validate_tubes(chain: SmoothChain, samples_per_face: int = 48,
                   seed: int = 0) -> TubeReport:
    """Check the slope bound, tube disjointness, and foot uniqueness.

    The analytic bound b_i <= sin(theta_min)/4 is checked first and raises
    TubeConfigError naming the offending wall pair; the sampling checks then
    confirm disjointness of same-level tubes and that each sampled tube
    point projects back to the face it was built over.
    """
    group = chain.group
    theta: float | None
    slope_margins: dict[int, float] = {}
    if len(group.mirrors) >= 2:
        theta, pair = minimal_wall_angle(group)
        bound = math.sin(theta) / 4.0
        for i, b_i in chain.tubes.b.items():
            slope_margins[i] = bound - b_i
            if b_i > bound + 1e-12:
                raise TubeConfigError(
                    f"slope b_{i} = {b_i:g} exceeds sin(theta_min)/4 = {bound:.6g}"
                    f" set by mirror pair {pair}")
    else:
        theta = None
        slope_margins = {i: math.inf for i in chain.tubes.b}

    rng = np.random.default_rng(seed)
    strat = chain.stratification
    checked = 0
    for level in range(1, chain.rank):
        faces = strat.faces_at_level(level)
        for face in faces:
            n_dirs = max(2, samples_per_face // 12)
            dirs = _normal_space_directions(face, chain.chamber.dimension, rng, n_dirs)
            for scale in (0.3, 1.0, 3.0):
                x = strat.interior_point(face, radius=scale)
                radius = _radius_at(chain, face, x)
                for v in dirs:
                    for frac in (0.25, 0.6, 0.95):
                        p = x + (frac * radius) * v
                        hits = _claiming_faces(chain, level, p)
                        checked += 1
                        owners = [h for h in hits if h.face is face]
                        others = [h for h in hits if h.face is not face]
                        if others:
                            raise TubeConfigError(
                                f"tubes overlap at level {level}: faces"
                                f" {face.active} and {others[0].face.active}"
                                f" both contain {p}")
                        if not owners:
                            continue       # fell past a face edge; harmless
                        if np.linalg.norm(owners[0].foot - x) > 1e-9 * (1 + scale):
                            raise TubeConfigError(
                                f"foot of a level-{level} tube point is not unique")
    return TubeReport(
        theta_min=theta,
        slope_margins=slope_margins,
        tube_points_checked=checked,
        disjoint=True,
        feet_unique=True,
    )
