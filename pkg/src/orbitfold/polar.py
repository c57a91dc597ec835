"""Concrete group actions whose orbits become level sets of the smooth map.

Two models: real symmetric 3x3 matrices under rotation conjugation (the
section is the diagonal matrices, folded by coordinate permutations), and
the rotation group acting on R^n (the section is a line through 0, folded
by a sign flip). Eigenvalues are computed by hand-rolled cyclic Jacobi
sweeps so the model has no linear-algebra dependency to certify against
itself; the test suite cross-checks them with numpy's eigensolver.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np
from scipy import optimize

from .chamber import classify, fold
from .groups import ReflectionGroup, generate_group, preset_group
from .smoothing import SmoothChain, apply_H

JACOBI_TOL = 1e-12
_SYM_AXES = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


# ---------------------------------------------------------------------------
# symmetric 3x3 plumbing
# ---------------------------------------------------------------------------

def sym_to_matrix(v: np.ndarray) -> np.ndarray:
    """(a11, a22, a33, a12, a13, a23) -> symmetric matrix."""
    v = np.asarray(v, dtype=float)
    if v.shape != (6,):
        raise ValueError("symmetric coordinates must have shape (6,)")
    A = np.zeros((3, 3))
    for val, (i, j) in zip(v, _SYM_AXES):
        A[i, j] = val
        A[j, i] = val
    return A


def matrix_to_sym(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    _check_symmetric(A)
    return np.array([A[i, j] for i, j in _SYM_AXES])


def _check_symmetric(A: np.ndarray) -> None:
    if A.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    scale = 1.0 + float(np.max(np.abs(A)))
    if float(np.max(np.abs(A - A.T))) > 1e-9 * scale:
        raise ValueError("matrix is not symmetric")


def jacobi_eigensystem(A: np.ndarray, tol: float = JACOBI_TOL,
                       max_sweeps: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching eigenvector columns of a
    symmetric 3x3 matrix, by cyclic Jacobi rotations.

    Each sweep zeroes the off-diagonal entries one at a time; the
    off-diagonal mass falls quadratically, so a handful of sweeps reach
    rounding level. Convergence is declared when every off-diagonal entry
    is below tol relative to the matrix scale.
    """
    A = np.array(A, dtype=float)
    _check_symmetric(A)
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    scale = 1.0 + float(np.max(np.abs(A)))
    for _ in range(max_sweeps):
        off = max(abs(A[i, j]) for i in range(n) for j in range(i + 1, n))
        if off <= tol * scale:
            break
        for p in range(n):
            for q in range(p + 1, n):
                if abs(A[p, q]) <= tol * scale * 1e-2:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    else:
        raise RuntimeError("Jacobi sweeps did not converge")
    vals = np.diag(A).copy()
    order = np.argsort(-vals)
    vals = vals[order]
    V = V[:, order]
    if np.linalg.det(V) < 0:
        V = V.copy()
        V[:, -1] = -V[:, -1]
    return vals, V


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class PolarModel:
    """An ambient group action together with its section data."""

    name: str
    ambient_dim: int
    section_dim: int
    section_map: Callable[[np.ndarray], np.ndarray]
    weyl: ReflectionGroup


def sym_eig_model() -> PolarModel:
    """Symmetric 3x3 matrices under conjugation by rotations; the section
    is the diagonal matrices and descending eigenvalues realize the fold
    into the chamber x1 >= x2 >= x3."""
    weyl = preset_group("a2")

    def section_map(p: np.ndarray) -> np.ndarray:
        A = np.asarray(p, dtype=float)
        if A.shape == (6,):
            A = sym_to_matrix(A)
        vals, _ = jacobi_eigensystem(A)
        return vals

    return PolarModel(name="sym3-eig", ambient_dim=6, section_dim=3,
                      section_map=section_map, weyl=weyl)


def radial_model(n: int) -> PolarModel:
    """Rotations of R^n; the section is a line through the origin and the
    fold is the sign flip, so the section coordinate is the norm."""
    if n < 2:
        raise ValueError("radial model needs ambient dimension >= 2")
    weyl = generate_group([np.array([1.0])])

    def section_map(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (n,):
            raise ValueError(f"point must have shape ({n},)")
        return np.array([np.linalg.norm(p)])

    return PolarModel(name=f"radial-{n}", ambient_dim=n, section_dim=1,
                      section_map=section_map, weyl=weyl)


def model_H(model: PolarModel, chain: SmoothChain, p: np.ndarray) -> np.ndarray:
    """The smooth invariant map on the ambient space: project to the
    section, fold, then apply the smoothing composite."""
    if chain.group.dimension != model.weyl.dimension or \
            chain.group.order != model.weyl.order:
        raise ValueError("chain was not built on the model's folding group")
    return apply_H(chain, model.section_map(p))


def random_rotation(rng: np.random.Generator, n: int = 3) -> np.ndarray:
    """Haar-ish random rotation: QR of a Gaussian matrix, sign-fixed."""
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q = q.copy()
        q[:, 0] = -q[:, 0]
    return q


# ---------------------------------------------------------------------------
# equidistance of regular level sets
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class EquidistanceReport:
    """Distances from samples of one regular level set to another."""

    distances: tuple[float, ...]
    spread: float
    analytic: float


def _rodrigues(theta: np.ndarray) -> np.ndarray:
    angle = float(np.linalg.norm(theta))
    if angle < 1e-14:
        return np.eye(3)
    k = theta / angle
    K = np.array([[0.0, -k[2], k[1]],
                  [k[2], 0.0, -k[0]],
                  [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def _require_regular(model: PolarModel, chamber, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (model.section_dim,):
        raise ValueError(f"section value must have shape ({model.section_dim},)")
    folded = fold(model.weyl, chamber, v).image
    desc = classify(model.weyl, folded)
    if desc.walls_containing:
        raise ValueError("section value lies on a wall; level set is not regular")
    return folded


def equidistance_probe(
    model: PolarModel,
    chain: SmoothChain,
    v1: np.ndarray,
    v2: np.ndarray,
    samples: int = 10,
    seed: int = 0,
) -> EquidistanceReport:
    """Sample the level set over v1 and measure the ambient distance to the
    level set over v2; regular level sets of the fold sit at constant
    distance, so the spread of the measurements should vanish.

    The analytic field carries the sorted-spectrum distance (symmetric
    model) or radius difference (radial model) as an independent check.
    """
    a = _require_regular(model, chain.chamber, v1)
    b = _require_regular(model, chain.chamber, v2)
    rng = np.random.default_rng(seed)

    if model.name.startswith("radial"):
        n = model.ambient_dim
        r1, r2 = float(a[0]), float(b[0])
        dists = []
        for _ in range(samples):
            u = rng.normal(size=n)
            u = u / np.linalg.norm(u)
            p = r1 * u
            # nearest point of the second sphere lies along the same ray
            dists.append(abs(float(np.linalg.norm(p)) - r2))
        analytic = abs(r1 - r2)
    elif model.name == "sym3-eig":
        D2 = np.diag(b)
        dists = []
        for _ in range(samples):
            Q = random_rotation(rng)
            p = Q @ np.diag(a) @ Q.T
            _, frame = jacobi_eigensystem(p)

            def objective(theta: np.ndarray) -> float:
                R = frame @ _rodrigues(theta)
                return float(np.linalg.norm(p - R @ D2 @ R.T) ** 2)

            res = optimize.minimize(objective, np.zeros(3), method="BFGS",
                                    options={"gtol": 1e-12})
            dists.append(float(np.sqrt(max(res.fun, 0.0))))
        analytic = float(np.linalg.norm(a - b))
    else:
        raise ValueError(f"no level-set sampler for model {model.name!r}")

    dists_t = tuple(dists)
    return EquidistanceReport(
        distances=dists_t,
        spread=max(dists_t) - min(dists_t),
        analytic=analytic,
    )


# ---------------------------------------------------------------------------
# wall-crossing curves of symmetric matrices
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class CrossingCurve:
    """A line of symmetric matrices crossing the repeated-eigenvalue locus
    transversally at s = 0."""

    base: np.ndarray          # matrix with a repeated eigenvalue pair
    velocity: np.ndarray      # symmetric direction, coupling the pair
    frame: np.ndarray         # rotation conjugating the whole line
    derivative_gap: float     # analytic gap of d/ds (sorted eigenvalues)

    def __call__(self, s: float) -> np.ndarray:
        Q = self.frame
        return Q @ (self.base + float(s) * self.velocity) @ Q.T


def eigen_crossing_curve(seed: int = 0, gap: float = 1.0) -> CrossingCurve:
    """Build a transversal crossing with a prescribed first-derivative gap.

    The base is diag(a, a, c); within the repeated 2x2 block the velocity
    splits the double eigenvalue at rate r = sqrt(((t11-t22)/2)^2 + t12^2)
    per unit s. Sorting swaps the two branches at s = 0, so their
    derivatives jump by +2r and -2r and the sorted-spectrum derivative
    vector jumps by 2*sqrt(2)*r in norm. The velocity is rescaled so that
    norm equals the requested gap.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.5, 1.5)
    c = a - rng.uniform(1.0, 2.0)
    base = np.diag([a, a, c])
    T = rng.normal(size=(3, 3))
    T = 0.5 * (T + T.T)
    r = float(np.hypot(0.5 * (T[0, 0] - T[1, 1]), T[0, 1]))
    while r < 1e-3:      # resample a degenerate coupling
        T = rng.normal(size=(3, 3))
        T = 0.5 * (T + T.T)
        r = float(np.hypot(0.5 * (T[0, 0] - T[1, 1]), T[0, 1]))
    T = T * (gap / (2.0 * np.sqrt(2.0) * r))
    return CrossingCurve(
        base=base,
        velocity=T,
        frame=random_rotation(rng),
        derivative_gap=gap,
    )
