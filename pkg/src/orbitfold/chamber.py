"""Fundamental chamber: folding, orbit-type classification, face lattice.

The closed chamber is the cone {p : <p, n_i> >= 0} over the simple normals.
Folding repeatedly reflects across the lowest-index violated wall, which
terminates for finite groups and accumulates a single orthogonal transform.
Faces of the chamber are indexed by subsets of the simple normals; the level
of a face counts its dimension above the minimal stratum, so level 0 is the
essential origin (times the fixed subspace) and level == essential rank is
the open chamber.
"""

from __future__ import annotations

import dataclasses
import itertools
from typing import Iterable

import numpy as np

from .groups import GroupElement, ReflectionGroup, essential_split

ON_WALL_TOL = 1e-9        # relative wall-incidence tolerance for classify
CHAMBER_TOL = 1e-12       # fold images satisfy inequalities >= -CHAMBER_TOL
_RANK_TOL = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class Chamber:
    """Closed fundamental chamber cut out by inward simple normals."""

    simple_normals: np.ndarray   # (k, n), rows are inward unit normals
    witness: np.ndarray          # a point in the open chamber

    def __post_init__(self) -> None:
        normals = np.array(self.simple_normals, dtype=float)
        normals.flags.writeable = False
        object.__setattr__(self, "simple_normals", normals)
        wit = np.array(self.witness, dtype=float)
        wit.flags.writeable = False
        object.__setattr__(self, "witness", wit)
        if np.min(normals @ wit) <= 0:
            raise ValueError("witness must lie strictly inside the chamber")

    @property
    def dimension(self) -> int:
        return self.simple_normals.shape[1]

    def inequality_values(self, p: np.ndarray) -> np.ndarray:
        return self.simple_normals @ p

    def contains(self, p: Iterable[float], tol: float = 1e-9) -> bool:
        p = np.asarray(p, dtype=float)
        scale = 1.0 + float(np.linalg.norm(p))
        return bool(np.min(self.simple_normals @ p) >= -tol * scale)


@dataclasses.dataclass(frozen=True, eq=False)
class FoldResult:
    image: np.ndarray
    element: GroupElement
    steps: int


@dataclasses.dataclass(frozen=True)
class StratumDescriptor:
    walls_containing: tuple[int, ...]   # indices into group.mirrors
    level: int                          # 0 = minimal stratum, rank = regular
    dimension: int                      # dimension of the stratum in R^n


def chamber_from_group(group: ReflectionGroup) -> Chamber:
    """Chamber of the group's simple system, with an interior witness point."""
    normals = np.stack([h.normal for h in group.simple_system])
    rays = _edge_rays(normals)
    witness = rays.sum(axis=0)
    witness /= np.linalg.norm(witness)
    return Chamber(simple_normals=normals, witness=witness)


def _fold_image(normals: np.ndarray, p: np.ndarray, max_steps: int) -> tuple[np.ndarray, int]:
    """Reflect across the lowest-index violated wall until inside. Fast path.

    Points within rounding distance of a wall count as inside: a dot product
    of a few ulps below zero calls for a correction smaller than the spacing
    of floats at that coordinate, so reflecting would leave the point
    bitwise unchanged and the loop would never terminate.
    """
    cur = np.array(p, dtype=float)
    tol = 1e-14 * (1.0 + float(np.linalg.norm(cur)))
    steps = 0
    while True:
        dots = normals @ cur
        bad = np.flatnonzero(dots < -tol)
        if bad.size == 0:
            return cur, steps
        i = int(bad[0])
        cur = cur - (2.0 * dots[i]) * normals[i]
        steps += 1
        if steps > max_steps:
            raise RuntimeError("folding did not terminate; chamber data inconsistent")


def fold(group: ReflectionGroup, chamber: Chamber, p: Iterable[float]) -> FoldResult:
    """Fold p into the closed chamber, recording the orthogonal transform."""
    p = np.asarray(p, dtype=float)
    if p.shape != (chamber.dimension,):
        raise ValueError(f"point must have shape ({chamber.dimension},)")
    normals = chamber.simple_normals
    cur = p.copy()
    mat = np.eye(chamber.dimension)
    tol = 1e-14 * (1.0 + float(np.linalg.norm(cur)))
    steps = 0
    while True:
        dots = normals @ cur
        bad = np.flatnonzero(dots < -tol)
        if bad.size == 0:
            break
        i = int(bad[0])
        n_i = normals[i]
        cur = cur - (2.0 * dots[i]) * n_i
        mat = mat - 2.0 * np.outer(n_i, n_i @ mat)
        steps += 1
        if steps > group.order:
            raise RuntimeError("folding exceeded the group order; not terminating")
    element = group.elements[group.element_index(mat)]
    return FoldResult(image=cur, element=element, steps=steps)


def classify(group: ReflectionGroup, p: Iterable[float], tol: float = ON_WALL_TOL) -> StratumDescriptor:
    """Mirror incidences of p and the level of its orbit-type stratum.

    Incidence is relative: |<p_eff, n>| <= tol * (1 + |p_eff|). The level is
    essential_rank minus the rank of the collected normals, so the minimal
    stratum gets level 0 everywhere the group acts.
    """
    p = np.asarray(p, dtype=float)
    _, p_eff = essential_split(group, p)
    scale = 1.0 + float(np.linalg.norm(p_eff))
    walls = tuple(
        i for i, m in enumerate(group.mirrors)
        if abs(float(m.normal @ p_eff)) <= tol * scale
    )
    if walls:
        stack = np.stack([group.mirrors[i].normal for i in walls])
        svals = np.linalg.svd(stack, compute_uv=False)
        rank = int(np.sum(svals > _RANK_TOL))
    else:
        rank = 0
    return StratumDescriptor(
        walls_containing=walls,
        level=group.essential_rank - rank,
        dimension=group.dimension - rank,
    )


# ---------------------------------------------------------------------------
# face lattice
# ---------------------------------------------------------------------------

def _null_space_basis(rows: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis (dim, d) of the intersection of row kernels."""
    if rows.size == 0:
        return np.eye(dim)
    _, svals, vt = np.linalg.svd(rows)
    rank = int(np.sum(svals > _RANK_TOL))
    return vt[rank:].T.copy()


def _edge_rays(normals: np.ndarray) -> np.ndarray:
    """Rays u_j of the chamber cone: <u_j, n_i> = 0 for i != j, > 0 for i = j.

    The rays live in the essential span of the simple normals; they form the
    dual basis to the normals inside that span.
    """
    k, dim = normals.shape
    q, _ = np.linalg.qr(normals.T)        # (dim, k) orthonormal essential basis
    coords = normals @ q                  # (k, k) normals in essential coords
    dual = np.linalg.inv(coords).T        # rows: dual basis coordinates
    rays = dual @ q.T                     # back to ambient, rows are rays
    rays /= np.linalg.norm(rays, axis=1)[:, None]
    check = normals @ rays.T
    if not np.allclose(check, np.diag(np.diag(check)), atol=1e-10):
        raise RuntimeError("edge rays failed the duality check")
    if np.min(np.diag(check)) <= 0:
        raise RuntimeError("edge ray oriented outward; chamber data inconsistent")
    return rays


@dataclasses.dataclass(frozen=True, eq=False)
class Face:
    """Closed chamber face: active walls set to equality, the rest inequalities."""

    active: tuple[int, ...]      # indices into chamber.simple_normals
    inactive: tuple[int, ...]
    level: int
    basis: np.ndarray            # (n, d) orthonormal basis of the linear span

    @property
    def span_dimension(self) -> int:
        return self.basis.shape[1]

    def project_to_span(self, p: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ p)


@dataclasses.dataclass(frozen=True, eq=False)
class Stratification:
    """All chamber faces grouped by level, plus projection caches."""

    group: ReflectionGroup
    chamber: Chamber
    faces: tuple[Face, ...]
    by_level: dict[int, tuple[int, ...]]      # level -> face indices
    edge_rays: np.ndarray                     # (rank, n) chamber edge rays
    subset_bases: dict[frozenset, np.ndarray]

    @property
    def rank(self) -> int:
        return self.group.essential_rank

    def faces_at_level(self, level: int) -> list[Face]:
        return [self.faces[i] for i in self.by_level.get(level, ())]

    def face_contains(self, face: Face, p: np.ndarray, tol: float = 1e-9,
                      strict_interior: bool = False) -> bool:
        """Membership of p in the closed face (or its relative interior)."""
        scale = 1.0 + float(np.linalg.norm(p))
        off_span = float(np.linalg.norm(p - face.project_to_span(p)))
        if off_span > tol * scale:
            return False
        normals = self.chamber.simple_normals
        for j in face.inactive:
            v = float(normals[j] @ p)
            if strict_interior:
                if v <= tol * scale:
                    return False
            elif v < -tol * scale:
                return False
        return True

    def interior_point(self, face: Face, radius: float = 1.0) -> np.ndarray:
        """A point in the relative interior of the face at the given scale."""
        if not face.inactive:
            return np.zeros(self.chamber.dimension)
        pt = self.edge_rays[list(face.inactive)].sum(axis=0)
        return radius * pt / np.linalg.norm(pt)


def strata_levels(group: ReflectionGroup, chamber: Chamber) -> Stratification:
    """Enumerate the chamber face lattice from subsets of the simple normals."""
    normals = chamber.simple_normals
    k, dim = normals.shape
    if k != group.essential_rank:
        raise ValueError("chamber wall count must equal the essential rank")
    subset_bases: dict[frozenset, np.ndarray] = {}
    for size in range(k + 1):
        for subset in itertools.combinations(range(k), size):
            key = frozenset(subset)
            rows = normals[list(subset)] if subset else np.zeros((0, dim))
            subset_bases[key] = _null_space_basis(rows, dim)

    faces: list[Face] = []
    for size in range(k + 1):
        for subset in itertools.combinations(range(k), size):
            active = tuple(subset)
            inactive = tuple(j for j in range(k) if j not in subset)
            faces.append(
                Face(
                    active=active,
                    inactive=inactive,
                    level=k - size,
                    basis=subset_bases[frozenset(subset)],
                )
            )
    faces.sort(key=lambda f: (f.level, f.active))
    by_level: dict[int, list[int]] = {}
    for i, f in enumerate(faces):
        by_level.setdefault(f.level, []).append(i)
    return Stratification(
        group=group,
        chamber=chamber,
        faces=tuple(faces),
        by_level={lv: tuple(ix) for lv, ix in by_level.items()},
        edge_rays=_edge_rays(normals),
        subset_bases=subset_bases,
    )


def dist_to_face(strat: Stratification, face: Face, p: Iterable[float]) -> float:
    """Exact Euclidean distance from p to one closed face.

    The nearest point of a polyhedral cone lies in the relative interior of
    one of its subfaces, and there it is the orthogonal projection onto that
    subface's span. Enumerating the (at most 2^rank) subfaces is exact.
    """
    p = np.asarray(p, dtype=float)
    normals = strat.chamber.simple_normals
    scale = 1.0 + float(np.linalg.norm(p))
    best = np.inf
    inactive = face.inactive
    for extra in itertools.chain.from_iterable(
        itertools.combinations(inactive, r) for r in range(len(inactive) + 1)
    ):
        key = frozenset(face.active + extra)
        basis = strat.subset_bases[key]
        q = basis @ (basis.T @ p)
        rest = [j for j in inactive if j not in extra]
        if rest and np.min(normals[rest] @ q) < -1e-9 * scale:
            continue
        d = float(np.linalg.norm(p - q))
        if d < best:
            best = d
    return best


def dist_to_level(strat: Stratification, level: int, p: Iterable[float]) -> float:
    """Distance from p to the union of closed chamber faces at one level."""
    if level not in strat.by_level:
        raise ValueError(f"no faces at level {level}")
    p = np.asarray(p, dtype=float)
    return min(dist_to_face(strat, f, p) for f in strat.faces_at_level(level))
