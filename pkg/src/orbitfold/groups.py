"""Finite reflection groups on R^n generated by mirrors through the origin.

A group is built by breadth-first closure of a set of generating reflections.
Closure records, for every element, one shortest word in the generators, the
full mirror arrangement, a simple system bounding a fundamental chamber, and
the subspace fixed by the whole group (so callers can split points into a
fixed part and an essential part).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

UNIT_TOL = 1e-12       # generator normals must be unit length to this
MATCH_TOL = 1e-9       # entrywise tolerance identifying elements / mirrors
ORTHO_TOL = 1e-10      # orthogonality tolerance for element matrices
DEFAULT_CAP = 10_000   # closure size guard
_KEY_DECIMALS = 7      # rounding used for exact-dict element lookup


class GroupClosureError(RuntimeError):
    """Group not finite at this cap (or generators mis-specified)."""


def _as_unit_vector(v: Iterable[float]) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("normal must be a nonempty 1-D vector")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > 1e-6:
        if norm == 0.0:
            raise ValueError("normal must be nonzero")
        arr = arr / norm
    if abs(float(np.linalg.norm(arr)) - 1.0) > UNIT_TOL:
        arr = arr / float(np.linalg.norm(arr))
    arr.flags.writeable = False
    return arr


def _canonical_sign(normal: np.ndarray) -> np.ndarray:
    """Fix the sign ambiguity: first component larger than MATCH_TOL is positive."""
    for x in normal:
        if abs(x) > MATCH_TOL:
            out = normal if x > 0 else -normal
            out = np.array(out, dtype=float)
            out.flags.writeable = False
            return out
    raise ValueError("normal is numerically zero")


@dataclasses.dataclass(frozen=True, eq=False)
class Hyperplane:
    """A mirror: hyperplane through the origin with unit normal.

    Two hyperplanes are the same mirror when their normals agree up to sign
    within MATCH_TOL.
    """

    normal: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "normal", _as_unit_vector(self.normal))

    @property
    def dimension(self) -> int:
        return self.normal.size

    def same_as(self, other: "Hyperplane", tol: float = MATCH_TOL) -> bool:
        if self.normal.size != other.normal.size:
            return False
        return bool(
            np.all(np.abs(self.normal - other.normal) <= tol)
            or np.all(np.abs(self.normal + other.normal) <= tol)
        )

    def canonical(self) -> "Hyperplane":
        return Hyperplane(_canonical_sign(self.normal))


def reflect(p: Iterable[float], mirror: Hyperplane) -> np.ndarray:
    """Reflect a point across a mirror: p - 2 <p, n> n."""
    p = np.asarray(p, dtype=float)
    n = mirror.normal
    if p.shape[-1] != n.size:
        raise ValueError(f"point dimension {p.shape[-1]} != mirror dimension {n.size}")
    return p - 2.0 * (p @ n)[..., None] * n if p.ndim > 1 else p - 2.0 * float(p @ n) * n


def reflection_matrix(normal: np.ndarray) -> np.ndarray:
    n = np.asarray(normal, dtype=float)
    return np.eye(n.size) - 2.0 * np.outer(n, n)


@dataclasses.dataclass(frozen=True, eq=False)
class GroupElement:
    """Orthogonal matrix plus one shortest word in the generator indices."""

    matrix: np.ndarray
    word: tuple[int, ...]

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=float)
        n = mat.shape[0]
        if mat.shape != (n, n):
            raise ValueError("element matrix must be square")
        if not np.allclose(mat @ mat.T, np.eye(n), atol=ORTHO_TOL):
            raise ValueError("element matrix is not orthogonal within 1e-10")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "word", tuple(int(i) for i in self.word))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_identity(self) -> bool:
        return bool(np.allclose(self.matrix, np.eye(self.dimension), atol=MATCH_TOL))

    def is_reflection(self) -> bool:
        """Orthogonal involution whose -1 eigenspace is one-dimensional."""
        n = self.dimension
        if not np.allclose(self.matrix, self.matrix.T, atol=ORTHO_TOL):
            return False
        if not np.allclose(self.matrix @ self.matrix, np.eye(n), atol=ORTHO_TOL):
            return False
        return abs(float(np.trace(self.matrix)) - (n - 2)) < 1e-8

    def mirror(self) -> Hyperplane:
        """Extract the mirror of a reflection from (I - M)/2 = n n^T."""
        if not self.is_reflection():
            raise ValueError("element is not a reflection")
        proj = 0.5 * (np.eye(self.dimension) - self.matrix)
        col = int(np.argmax(np.linalg.norm(proj, axis=0)))
        normal = proj[:, col] / np.linalg.norm(proj[:, col])
        return Hyperplane(_canonical_sign(normal))

    def same_as(self, other: "GroupElement", tol: float = MATCH_TOL) -> bool:
        return bool(np.all(np.abs(self.matrix - other.matrix) <= tol))


def _matrix_key(mat: np.ndarray) -> bytes:
    # +0.0 collapses -0.0 so equal matrices can't get distinct keys
    return (np.round(mat, _KEY_DECIMALS) + 0.0).tobytes()


@dataclasses.dataclass(eq=False)
class ReflectionGroup:
    """A finite reflection group with its arrangement data.

    fixed_subspace is an (n, f) orthonormal basis of the subspace fixed by
    every element (f may be zero); essential_rank = n - f.
    """

    dimension: int
    generators: tuple[Hyperplane, ...]
    elements: tuple[GroupElement, ...]
    mirrors: tuple[Hyperplane, ...]
    simple_system: tuple[Hyperplane, ...]
    fixed_subspace: np.ndarray
    essential_rank: int

    def __post_init__(self) -> None:
        self._index = {_matrix_key(e.matrix): i for i, e in enumerate(self.elements)}

    @property
    def order(self) -> int:
        return len(self.elements)

    def element_index(self, matrix: np.ndarray) -> int:
        """Index of the element equal to `matrix` within MATCH_TOL."""
        idx = self._index.get(_matrix_key(matrix))
        if idx is not None:
            return idx
        for i, e in enumerate(self.elements):  # rounding-boundary fallback
            if np.all(np.abs(e.matrix - matrix) <= MATCH_TOL):
                return i
        raise ValueError("matrix does not match any group element")

    def contains_matrix(self, matrix: np.ndarray) -> bool:
        try:
            self.element_index(matrix)
            return True
        except ValueError:
            return False


def _deduplicate_mirrors(mirrors: Sequence[Hyperplane]) -> list[Hyperplane]:
    out: list[Hyperplane] = []
    for m in mirrors:
        if not any(m.same_as(kept) for kept in out):
            out.append(m.canonical())
    return out


def _generic_witness(dimension: int, mirrors: Sequence[Hyperplane]) -> np.ndarray:
    """Deterministic point off every mirror (used to pick a chamber)."""
    base = np.array([1.0 / math.sqrt(2.0 + k) for k in range(dimension)])
    normals = np.stack([m.normal for m in mirrors])
    for attempt in range(64):
        cand = base + attempt * np.array(
            [math.sin(1.0 + 3.0 * k + attempt) for k in range(dimension)]
        ) / 7.0
        cand = cand / np.linalg.norm(cand)
        if np.min(np.abs(normals @ cand)) > 1e-4:
            return cand
    raise RuntimeError("could not find a generic chamber witness")


def _simple_from_mirrors(
    mirrors: Sequence[Hyperplane],
    witness: np.ndarray,
    essential_rank: int,
    generators: Sequence[Hyperplane],
) -> tuple[Hyperplane, ...]:
    """Extreme (irredundant) chamber walls for the chamber containing witness.

    Orient all normals toward the witness; a wall is simple exactly when its
    normal is not a nonnegative combination of the others (tested with NNLS).
    """
    oriented = []
    for m in mirrors:
        s = float(m.normal @ witness)
        if abs(s) < 1e-12:
            raise ValueError("witness lies on a mirror; cannot pick a chamber")
        oriented.append(m.normal if s > 0 else -m.normal)
    oriented_arr = np.stack(oriented)

    simple_idx: list[int] = []
    for i in range(len(oriented)):
        others = np.delete(oriented_arr, i, axis=0)
        if others.shape[0] == 0:
            simple_idx.append(i)
            continue
        _, residual = nnls(others.T, oriented_arr[i])
        if residual > 1e-7:
            simple_idx.append(i)

    if len(simple_idx) != essential_rank:
        raise RuntimeError(
            f"chamber has {len(simple_idx)} walls, expected essential rank {essential_rank}"
        )

    # Prefer generator order where generators are themselves simple walls.
    chosen = [Hyperplane(oriented_arr[i]) for i in simple_idx]
    ordered: list[Hyperplane] = []
    for g in generators:
        for h in chosen:
            if g.same_as(h) and not any(h.same_as(o) for o in ordered):
                ordered.append(h)
    for h in chosen:
        if not any(h.same_as(o) for o in ordered):
            ordered.append(h)
    return tuple(ordered)


def generate_group(
    normals: Sequence[Iterable[float]],
    cap: int = DEFAULT_CAP,
    witness: Iterable[float] | None = None,
) -> ReflectionGroup:
    """Breadth-first closure of the reflections given by `normals`.

    Raises GroupClosureError("group not finite at this cap") when the closure
    exceeds `cap` elements, which signals an infinite or mis-specified group.
    """
    gens = [Hyperplane(n) for n in normals]
    if not gens:
        raise ValueError("at least one generating mirror is required")
    dim = gens[0].dimension
    if any(g.dimension != dim for g in gens):
        raise ValueError("all generator normals must share one dimension")
    uniq: list[Hyperplane] = []
    for g in gens:
        if not any(g.same_as(u) for u in uniq):
            uniq.append(g)
    gens = uniq

    gen_mats = [reflection_matrix(g.normal) for g in gens]
    identity = GroupElement(np.eye(dim), ())
    elements: list[GroupElement] = [identity]
    seen = {_matrix_key(identity.matrix)}
    frontier = [identity]
    while frontier:
        next_frontier: list[GroupElement] = []
        for elem in frontier:
            for gi, gmat in enumerate(gen_mats):
                prod = gmat @ elem.matrix
                key = _matrix_key(prod)
                if key in seen:
                    continue
                seen.add(key)
                new = GroupElement(prod, (gi,) + elem.word)
                elements.append(new)
                next_frontier.append(new)
                if len(elements) > cap:
                    raise GroupClosureError(
                        f"group not finite at this cap ({cap} elements exceeded)"
                    )
        frontier = next_frontier

    mirrors = _deduplicate_mirrors(
        [e.mirror() for e in elements if e.is_reflection()]
    )
    mirrors.sort(key=lambda m: tuple(np.round(m.normal, 9)))

    normal_stack = np.stack([m.normal for m in mirrors])
    _, svals, vt = np.linalg.svd(normal_stack)
    rank = int(np.sum(svals > 1e-10))
    fixed_basis = vt[rank:].T.copy() if rank < dim else np.zeros((dim, 0))
    fixed_basis.flags.writeable = False
    essential_rank = rank

    if witness is None:
        wit = _generic_witness(dim, mirrors)
    else:
        wit = np.asarray(witness, dtype=float)
    simple = _simple_from_mirrors(mirrors, wit, essential_rank, gens)

    return ReflectionGroup(
        dimension=dim,
        generators=tuple(gens),
        elements=tuple(elements),
        mirrors=tuple(mirrors),
        simple_system=simple,
        fixed_subspace=fixed_basis,
        essential_rank=essential_rank,
    )


def _i2_normals(m: int) -> list[np.ndarray]:
    """Simple system of the dihedral group of the regular m-gon arrangement."""
    return [
        np.array([0.0, 1.0]),
        np.array([math.sin(math.pi / m), -math.cos(math.pi / m)]),
    ]


_PRESET_BUILDERS = {
    "A2": lambda: (
        [np.array([1.0, -1.0, 0.0]) / math.sqrt(2), np.array([0.0, 1.0, -1.0]) / math.sqrt(2)],
        np.array([3.0, 2.0, 1.0]),
    ),
    "B2": lambda: (
        [np.array([0.0, 1.0]), np.array([1.0, -1.0]) / math.sqrt(2)],
        np.array([2.0, 1.0]),
    ),
    "A3": lambda: (
        [
            np.array([1.0, -1.0, 0.0, 0.0]) / math.sqrt(2),
            np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2),
            np.array([0.0, 0.0, 1.0, -1.0]) / math.sqrt(2),
        ],
        np.array([4.0, 3.0, 2.0, 1.0]),
    ),
    "B3": lambda: (
        [
            np.array([1.0, -1.0, 0.0]) / math.sqrt(2),
            np.array([0.0, 1.0, -1.0]) / math.sqrt(2),
            np.array([0.0, 0.0, 1.0]),
        ],
        np.array([3.0, 2.0, 1.0]),
    ),
}

PRESET_NAMES = ("I2", "A2", "B2", "A3", "B3")


def preset_group(name: str, m: int | None = None, cap: int = DEFAULT_CAP) -> ReflectionGroup:
    """Named small groups: I2(m) (pass m), A2, B2, A3, B3.

    A2 acts on R^3 and A3 on R^4 by coordinate permutations, so both have a
    one-dimensional fixed diagonal; the rest are essential.
    """
    key = name.strip()
    if key.upper().startswith("I2"):
        if m is None:
            inner = key[2:].strip("()-_: ")
            if not inner:
                raise ValueError("I2 preset needs m, e.g. preset_group('I2', m=5)")
            m = int(inner)
        if m < 2:
            raise ValueError("I2(m) needs m >= 2")
        normals = _i2_normals(m)
        theta = math.pi / (2 * m)
        witness = np.array([math.cos(theta), math.sin(theta)])
        return generate_group(normals, cap=cap, witness=witness)
    try:
        builder = _PRESET_BUILDERS[key.upper()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}") from None
    normals, witness = builder()
    return generate_group(normals, cap=cap, witness=witness)


def essential_split(group: ReflectionGroup, p: Iterable[float]) -> tuple[np.ndarray, np.ndarray]:
    """Split p = p_fixed + p_eff into the fixed subspace and its complement."""
    p = np.asarray(p, dtype=float)
    if p.shape != (group.dimension,):
        raise ValueError(f"point must have shape ({group.dimension},)")
    basis = group.fixed_subspace
    if basis.shape[1] == 0:
        return np.zeros_like(p), p.copy()
    p_fixed = basis @ (basis.T @ p)
    return p_fixed, p - p_fixed
