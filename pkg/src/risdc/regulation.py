"""RIS regulation-matrix representations and simple constructors.

A regulation matrix is stored in one of four forms:
  full      - dense N x N operator
  diagonal  - length-N unit-modulus phase vector (conventional RIS hardware)
  thin      - factor pair (A: N x r, B: r x N) with Theta = A B, r << N
  thin_sum  - weighted sum of thin pairs (multi-user combining output)

Thin forms exist so the large-N scenarios never materialize an N x N matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_UNIT_MODULUS_TOL = 1e-9


@dataclass(frozen=True)
class RegulationMatrix:
    n: int
    kind: str  # "full" | "diagonal" | "thin" | "thin_sum"
    full: np.ndarray | None = None
    phases: np.ndarray | None = None
    factors: tuple = ()

    @classmethod
    def from_full(cls, matrix: np.ndarray) -> "RegulationMatrix":
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError(f"full representation must be square, got {matrix.shape}")
        return cls(n=matrix.shape[0], kind="full", full=matrix)

    @classmethod
    def from_diagonal(cls, entries: np.ndarray) -> "RegulationMatrix":
        entries = np.asarray(entries, dtype=np.complex128).ravel()
        if np.max(np.abs(np.abs(entries) - 1.0)) > _UNIT_MODULUS_TOL:
            raise DomainError("diagonal entries must have unit modulus")
        return cls(n=entries.shape[0], kind="diagonal", phases=entries)

    @classmethod
    def from_thin(cls, a: np.ndarray, b: np.ndarray) -> "RegulationMatrix":
        a = np.asarray(a, dtype=np.complex128)
        b = np.asarray(b, dtype=np.complex128)
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0] or a.shape[0] != b.shape[1]:
            raise DomainError(f"thin factors have incompatible shapes {a.shape}, {b.shape}")
        return cls(n=a.shape[0], kind="thin", factors=((a, b),))

    @classmethod
    def from_thin_sum(cls, pairs) -> "RegulationMatrix":
        pairs = tuple((np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)) for a, b in pairs)
        if not pairs:
            raise DomainError("thin_sum requires at least one factor pair")
        n = pairs[0][0].shape[0]
        for a, b in pairs:
            if a.shape[0] != n or b.shape[1] != n or a.shape[1] != b.shape[0]:
                raise DomainError("inconsistent thin_sum factor shapes")
        return cls(n=n, kind="thin_sum", factors=pairs)

    def matmat(self, g: np.ndarray) -> np.ndarray:
        """Theta @ g without materializing N x N for thin forms."""
        g = np.asarray(g, dtype=np.complex128)
        if g.shape[0] != self.n:
            raise DomainError(f"operand has {g.shape[0]} rows, regulation matrix is {self.n}")
        if self.kind == "full":
            return self.full @ g
        if self.kind == "diagonal":
            return self.phases[:, None] * g
        out = None
        for a, b in self.factors:
            term = a @ (b @ g)
            out = term if out is None else out + term
        return out

    def as_full(self) -> np.ndarray:
        if self.kind == "full":
            return self.full
        if self.kind == "diagonal":
            return np.diag(self.phases)
        out = np.zeros((self.n, self.n), dtype=np.complex128)
        for a, b in self.factors:
            out += a @ b
        return out

    def spectral_norm(self) -> float:
        """Largest singular value; avoids N x N work for thin forms."""
        if self.kind == "full":
            return float(np.linalg.norm(self.full, 2))
        if self.kind == "diagonal":
            return float(np.max(np.abs(self.phases)))
        a_cat = np.concatenate([a for a, _ in self.factors], axis=1)
        b_cat = np.concatenate([b for _, b in self.factors], axis=0)
        # Theta = A B; with B^H = Q R, sigma(A B) = sigma(A R^H)
        _, r = np.linalg.qr(b_cat.conj().T)
        return float(np.linalg.norm(a_cat @ r.conj().T, 2))


def mirror_identity(n: int) -> RegulationMatrix:
    """Plain mirror: every element reflects with zero phase shift."""
    return RegulationMatrix.from_diagonal(np.ones(n, dtype=np.complex128))


def random_phase_diag(n: int, stream: np.random.Generator) -> RegulationMatrix:
    """i.i.d. uniform phases; models random scattering off a natural surface."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return RegulationMatrix.from_diagonal(np.exp(1j * stream.uniform(0.0, 2.0 * np.pi, size=n)))


def haar_random_unitary(n: int, stream: np.random.Generator) -> RegulationMatrix:
    """Haar-distributed unitary via complex Gaussian QR with the diagonal phase fix."""
    if n < 1:
        raise DomainError("n must be >= 1")
    q = _stiefel_sample(n, n, stream)
    return RegulationMatrix.from_full(q)


def _stiefel_sample(n: int, p: int, stream: np.random.Generator) -> np.ndarray:
    """Uniform n x p orthonormal frame (columns of a Haar unitary)."""
    z = (stream.standard_normal((n, p)) + 1j * stream.standard_normal((n, p))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def project_full_to_diagonal(theta: RegulationMatrix) -> RegulationMatrix:
    """Keep only the diagonal phases; constant-modulus projection for diagonal hardware."""
    if theta.kind != "full":
        raise DomainError("projection expects a full representation")
    d = np.diagonal(theta.full).copy()
    small = np.abs(d) < 1e-15
    d[small] = 1.0
    return RegulationMatrix.from_diagonal(d / np.abs(d))
