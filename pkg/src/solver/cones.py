"""
Cone algebra for the interior point solver.

Each cone knows its identity element, its Jordan product and division, how to
build a Nesterov-Todd scaling from a strictly interior (s, z) pair and how far
a point can move along a direction before leaving the cone.

PSD blocks are stored with the isometric svec packing: the lower triangle in
np.tril_indices order with off-diagonal entries scaled by sqrt(2), so that
svec(A) @ svec(B) == trace(A @ B).
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import linalg

SQRT2 = math.sqrt(2.0)
# x0^2 - ||x1||^2 is only resolved to machine precision relative to x0^2
JNORM_REL_FLOOR = float(np.finfo(float).eps)
TINY = 1e-150


# =============================================
# svec / smat
# =============================================

def svec_size(side: int) -> int:
    return side * (side + 1) // 2


def svec_side(size: int) -> int:
    side = int(round((math.sqrt(8 * size + 1) - 1) / 2))
    if svec_size(side) != size:
        raise ValueError(f"{size} is not a triangular number")
    return side


def _svec_layout(side: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = np.tril_indices(side)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, scale


def svec(matrix: np.ndarray) -> np.ndarray:
    """
    Pack a symmetric matrix (or a stack of them) into its isometric vector.

    Args:
        matrix: (p, p) or (k, p, p) array

    Returns:
        np.ndarray: (p(p+1)/2,) or (k, p(p+1)/2) array
    """
    side = matrix.shape[-1]
    rows, cols, scale = _svec_layout(side)
    return matrix[..., rows, cols] * scale


def smat(vector: np.ndarray) -> np.ndarray:
    """Inverse of svec; accepts a single vector or a (k, size) stack."""
    side = svec_side(vector.shape[-1])
    rows, cols, scale = _svec_layout(side)
    out = np.zeros(vector.shape[:-1] + (side, side), dtype=vector.dtype)
    values = vector / scale
    out[..., rows, cols] = values
    out[..., cols, rows] = values
    return out


# =============================================
# Cones
# =============================================

class Cone:
    """A generic self-dual cone block."""
    kind = "cone"

    def __init__(self, size: int):
        self.size = int(size)

    @property
    def dim(self) -> int:
        """Length of the block in the stacked slack vector."""
        return self.size

    @property
    def degree(self) -> int:
        raise NotImplementedError

    def identity(self) -> np.ndarray:
        raise NotImplementedError

    def product(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def divide(self, lam: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Solve lam o x = w for x; `lam` is the scaled point of this block."""
        raise NotImplementedError

    def scaling(self, s: np.ndarray, z: np.ndarray) -> "BlockScaling":
        raise NotImplementedError

    def max_step(self, x: np.ndarray, d: np.ndarray) -> float:
        """Largest alpha >= 0 with x + alpha d in the cone (inf if unbounded)."""
        raise NotImplementedError

    def margin(self, x: np.ndarray) -> float:
        """Signed distance-like measure; nonnegative iff x lies in the cone."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.size})"

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.size == other.size

    def __hash__(self) -> int:
        return hash((self.kind, self.size))


class ZeroCone(Cone):
    """The zero cone {0}; its rows become equality constraints."""
    kind = "zero"

    @property
    def degree(self) -> int:
        return 0

    def margin(self, x: np.ndarray) -> float:
        return -float(np.max(np.abs(x), initial=0.0))


class NonnegCone(Cone):
    """The nonnegative orthant."""
    kind = "nonneg"

    @property
    def degree(self) -> int:
        return self.size

    def identity(self) -> np.ndarray:
        return np.ones(self.size)

    def product(self, u, v):
        return u * v

    def divide(self, lam, w):
        return w / lam

    def scaling(self, s, z):
        return DiagonalScaling(np.sqrt(s / z), np.sqrt(s * z))

    def max_step(self, x, d):
        shrinking = d < 0
        if not np.any(shrinking):
            return math.inf
        return float(np.min(-x[shrinking] / d[shrinking]))

    def margin(self, x):
        return float(np.min(x, initial=math.inf))


class SecondOrderCone(Cone):
    """The second-order cone {(x0, x1): ||x1|| <= x0}."""
    kind = "soc"

    @property
    def degree(self) -> int:
        return 1

    def identity(self):
        e = np.zeros(self.size)
        e[0] = 1.0
        return e

    def product(self, u, v):
        out = np.empty(self.size)
        out[0] = u @ v
        out[1:] = u[0] * v[1:] + v[0] * u[1:]
        return out

    def divide(self, lam, w):
        det = self._jnorm2(lam)
        out = np.empty(self.size)
        out[0] = (lam[0] * w[0] - lam[1:] @ w[1:]) / det
        out[1:] = (w[1:] - out[0] * lam[1:]) / lam[0]
        return out

    @staticmethod
    def _jdot2(x):
        """Signed x0^2 - ||x1||^2 in factored form."""
        tail = float(np.linalg.norm(x[1:]))
        return (float(x[0]) - tail) * (float(x[0]) + tail)

    @classmethod
    def _jnorm2(cls, x):
        """x0^2 - ||x1||^2 of a point, floored where rounding has pushed it onto the boundary."""
        head = max(float(x[0]), float(np.linalg.norm(x[1:])), TINY)
        return max(cls._jdot2(x), JNORM_REL_FLOOR * head * head)

    def scaling(self, s, z):
        s_norm = math.sqrt(self._jnorm2(s))
        z_norm = math.sqrt(self._jnorm2(z))
        s_bar = s / s_norm
        z_bar = z / z_norm
        # s_bar @ z_bar >= 1 for interior points
        gamma = math.sqrt((1.0 + max(float(s_bar @ z_bar), 1.0)) / 2.0)
        jz_bar = z_bar.copy()
        jz_bar[1:] *= -1.0
        w = (s_bar + jz_bar) / (2.0 * gamma)
        beta = math.sqrt(s_norm / z_norm)

        w0, w1 = w[0], w[1:]
        block = np.eye(self.size - 1) + np.outer(w1, w1) / (1.0 + w0)
        forward = np.empty((self.size, self.size))
        forward[0, 0] = w0
        forward[0, 1:] = w1
        forward[1:, 0] = w1
        forward[1:, 1:] = block
        inverse = forward.copy()
        inverse[0, 1:] *= -1.0
        inverse[1:, 0] *= -1.0

        forward *= beta
        inverse /= beta
        return DenseScaling(forward, inverse, forward @ z)

    def max_step(self, x, d):
        if x[0] <= 0:
            return 0.0
        c = self._jnorm2(x)
        a = self._jdot2(d)
        b = x[0] * d[0] - x[1:] @ d[1:]
        disc = b * b - a * c
        if disc < 0 or (a > 0 and b >= 0):
            return math.inf
        denom = math.sqrt(disc) - b
        if denom <= 0:
            return math.inf
        return c / denom

    def margin(self, x):
        return float(x[0] - np.linalg.norm(x[1:]))


class PsdCone(Cone):
    """The cone of positive semidefinite matrices of side `size`, svec-packed."""
    kind = "psd"

    @property
    def dim(self) -> int:
        return svec_size(self.size)

    @property
    def degree(self) -> int:
        return self.size

    def identity(self):
        return svec(np.eye(self.size))

    def product(self, u, v):
        U, V = smat(u), smat(v)
        return svec((U @ V + V @ U) / 2.0)

    def divide(self, lam, w):
        eig = np.diag(smat(lam))
        W = smat(w)
        return svec(2.0 * W / (eig[:, None] + eig[None, :]))

    def scaling(self, s, z):
        chol_s = linalg.cholesky(smat(s), lower=True)
        chol_z = linalg.cholesky(smat(z), lower=True)
        _, singular, vt = linalg.svd(chol_z.T @ chol_s)
        R = chol_s @ vt.T / np.sqrt(singular)[None, :]
        R_inv = np.sqrt(singular)[:, None] * linalg.solve_triangular(chol_s, vt.T, lower=True, trans="T").T
        return CongruenceScaling(R, R_inv, svec(np.diag(singular)))

    def max_step(self, x, d):
        try:
            chol = linalg.cholesky(smat(x), lower=True)
        except linalg.LinAlgError:
            return 0.0
        half = linalg.solve_triangular(chol, smat(d), lower=True)
        scaled = linalg.solve_triangular(chol, half.T, lower=True)
        smallest = float(linalg.eigvalsh(scaled).min())
        if smallest >= 0:
            return math.inf
        return -1.0 / smallest

    def margin(self, x):
        return float(linalg.eigvalsh(smat(x)).min())


CONE_TYPES = {cls.kind: cls for cls in (ZeroCone, NonnegCone, SecondOrderCone, PsdCone)}


def make_cone(kind: str, size: int) -> Cone:
    """Build a cone from its tag ("zero", "nonneg", "soc", "psd") and size."""
    try:
        return CONE_TYPES[kind](size)
    except KeyError:
        raise ValueError(f"unknown cone kind {kind!r}") from None


# =============================================
# Nesterov-Todd scalings
# =============================================

class BlockScaling:
    """
    Scaling W of one cone block with W z = W^{-T} s = lam.

    Every apply method accepts either a vector or a (dim, k) matrix whose
    columns are transformed independently.
    """
    lam: np.ndarray

    def apply(self, u):
        raise NotImplementedError

    def apply_t(self, u):
        raise NotImplementedError

    def apply_inv(self, u):
        raise NotImplementedError

    def apply_inv_t(self, u):
        raise NotImplementedError


class DiagonalScaling(BlockScaling):

    def __init__(self, d: np.ndarray, lam: np.ndarray):
        self.d = d
        self.lam = lam

    def _scale(self, u, factor):
        return u * factor if u.ndim == 1 else u * factor[:, None]

    def apply(self, u):
        return self._scale(u, self.d)

    apply_t = apply

    def apply_inv(self, u):
        return self._scale(u, 1.0 / self.d)

    apply_inv_t = apply_inv


class DenseScaling(BlockScaling):
    """Symmetric dense scaling, used for second-order cone blocks."""

    def __init__(self, forward: np.ndarray, inverse: np.ndarray, lam: np.ndarray):
        self.forward = forward
        self.inverse = inverse
        self.lam = lam

    def apply(self, u):
        return self.forward @ u

    apply_t = apply

    def apply_inv(self, u):
        return self.inverse @ u

    apply_inv_t = apply_inv


class CongruenceScaling(BlockScaling):
    """PSD scaling W u = svec(R^T U R) and its transpose and inverses."""

    def __init__(self, R: np.ndarray, R_inv: np.ndarray, lam: np.ndarray):
        self.R = R
        self.R_inv = R_inv
        self.lam = lam

    @staticmethod
    def _congruence(left: np.ndarray, u: np.ndarray) -> np.ndarray:
        # svec(left @ U @ left^T), vectorised over the columns of u
        if u.ndim == 1:
            return svec(left @ smat(u) @ left.T)
        stacked = smat(u.T)
        return svec(left[None, :, :] @ stacked @ left.T[None, :, :]).T

    def apply(self, u):
        return self._congruence(self.R.T, u)

    def apply_t(self, u):
        return self._congruence(self.R, u)

    def apply_inv(self, u):
        return self._congruence(self.R_inv.T, u)

    def apply_inv_t(self, u):
        return self._congruence(self.R_inv, u)


# =============================================
# Product of cones
# =============================================

@dataclass
class ConeProduct:
    """The cartesian product of the inequality cone blocks, in stacking order."""
    cones: List[Cone]

    def __post_init__(self):
        offsets = np.concatenate([[0], np.cumsum([cone.dim for cone in self.cones], dtype=int)])
        self.slices = [slice(int(offsets[i]), int(offsets[i + 1])) for i in range(len(self.cones))]

    @property
    def dim(self) -> int:
        return sum(cone.dim for cone in self.cones)

    @property
    def degree(self) -> int:
        return sum(cone.degree for cone in self.cones)

    def blocks(self) -> Sequence[Tuple[Cone, slice]]:
        return list(zip(self.cones, self.slices))

    def identity(self) -> np.ndarray:
        if not self.cones:
            return np.zeros(0)
        return np.concatenate([cone.identity() for cone in self.cones])

    def product(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.empty(self.dim)
        for cone, sl in self.blocks():
            out[sl] = cone.product(u[sl], v[sl])
        return out

    def divide(self, lam: np.ndarray, w: np.ndarray) -> np.ndarray:
        out = np.empty(self.dim)
        for cone, sl in self.blocks():
            out[sl] = cone.divide(lam[sl], w[sl])
        return out

    def max_step(self, x: np.ndarray, d: np.ndarray) -> float:
        return min((cone.max_step(x[sl], d[sl]) for cone, sl in self.blocks()), default=math.inf)

    def margins(self, x: np.ndarray) -> List[float]:
        return [cone.margin(x[sl]) for cone, sl in self.blocks()]

    def scaling(self, s: np.ndarray, z: np.ndarray) -> "ProductScaling":
        return ProductScaling(self, [cone.scaling(s[sl], z[sl]) for cone, sl in self.blocks()])


class ProductScaling:
    """Block-diagonal Nesterov-Todd scaling of a ConeProduct."""

    def __init__(self, product: ConeProduct, blocks: List[BlockScaling]):
        self.product = product
        self.blocks = blocks
        self.lam = product.identity() * 0.0
        for block, sl in zip(blocks, product.slices):
            self.lam[sl] = block.lam

    def _map(self, u: np.ndarray, method: str) -> np.ndarray:
        out = np.empty_like(u, dtype=float)
        for block, sl in zip(self.blocks, self.product.slices):
            out[sl] = getattr(block, method)(u[sl])
        return out

    def apply(self, u):
        return self._map(u, "apply")

    def apply_t(self, u):
        return self._map(u, "apply_t")

    def apply_inv(self, u):
        return self._map(u, "apply_inv")

    def apply_inv_t(self, u):
        return self._map(u, "apply_inv_t")
