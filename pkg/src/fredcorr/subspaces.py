"""Exact subspace calculus on finite dimensional complex mode spaces.

A subspace is an explicit orthonormal frame; every index in the package
is an integer obtained from ranks of small dense matrices, so the same
quantity computed along two different routes must agree exactly.

The decision thresholds are set so that the synthetic families used in
the package keep their principal angles out of the ambiguous band; when
a cosine lands in that band anyway, the intersection switches to a
nullspace route with an absolute threshold, which resolves moderately
small angles correctly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidInput

__all__ = [
    "DEFAULT_TOL",
    "ANGLE_TOL",
    "AMBIGUITY_BAND",
    "FRAME_ATOL",
    "current_tolerance",
    "Subspace",
    "PairIndexReport",
    "RestrictionReport",
    "orthonormalize",
    "singular_values",
    "rank",
    "nullspace",
    "intersection",
    "subspace_sum",
    "complement",
    "pair_index",
    "restricted_projection_index",
    "principal_cosines",
    "direct_sum",
    "embed",
    "subspaces_equal",
    "random_subspace",
]

# Relative singular value cutoff for ranks and orthonormalization.
DEFAULT_TOL = 1e-9
# A principal cosine above 1 - ANGLE_TOL counts as an intersection direction.
ANGLE_TOL = 1e-9
# Cosines with 1 - sigma inside (FRAME_ATOL, AMBIGUITY_BAND) trigger the
# nullspace fallback instead of a silent threshold decision.
AMBIGUITY_BAND = 1e-6
# Orthonormality slack accepted when validating a frame.
FRAME_ATOL = 1e-12


def current_tolerance():
    """The relative cutoff in force right now (flag/env overrides rebind
    the module value, so read it dynamically rather than importing it)."""
    return DEFAULT_TOL


def _resolve(tol):
    return DEFAULT_TOL if tol is None else tol


def _svd(a, full_matrices=False):
    # the divide-and-conquer driver occasionally refuses benign inputs;
    # the transposed problem takes a different reduction and converges
    try:
        return np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError:
        u2, s2, vh2 = np.linalg.svd(a.conj().T, full_matrices=full_matrices)
        return vh2.conj().T, s2, u2.conj().T


def singular_values(a):
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError:
        return np.linalg.svd(a.conj().T, compute_uv=False)


def orthonormalize(matrix, tol=None):
    """Orthonormal basis of the column span of ``matrix``.

    Singular directions below ``tol`` times the largest singular value
    are dropped.  The result has shape ``(n, r)`` with ``r`` the numeric
    rank; a zero or empty input yields shape ``(n, 0)``.
    """
    tol = _resolve(tol)
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2:
        raise InvalidInput("expected a 2d array of column vectors")
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=np.complex128)
    u, s, _ = _svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[0], 0), dtype=np.complex128)
    r = int(np.count_nonzero(s > tol * s[0]))
    return u[:, :r]


def rank(matrix, tol=None, absolute_tol=None):
    """Numeric rank with a relative singular value cutoff.

    ``absolute_tol`` switches to a direct comparison, for callers that
    need the cutoff on the same scale as some other classification.
    """
    tol = _resolve(tol)
    a = np.asarray(matrix, dtype=np.complex128)
    if a.size == 0:
        return 0
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    cut = tol * s[0] if absolute_tol is None else absolute_tol
    return int(np.count_nonzero(s > cut))


def nullspace(matrix, tol=None, absolute_tol=None):
    """Orthonormal basis of the kernel of ``matrix``.

    With ``absolute_tol`` set, singular values are compared against it
    directly instead of relative to the largest one.  Returns an
    ``(n, k)`` array whose columns span the kernel.
    """
    tol = _resolve(tol)
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2:
        raise InvalidInput("expected a 2d array")
    n = a.shape[1]
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if a.shape[0] == 0:
        return np.eye(n, dtype=np.complex128)
    _, s, vh = _svd(a, full_matrices=True)
    if absolute_tol is None:
        cut = tol * s[0] if s.size and s[0] > 0 else np.inf
    else:
        cut = absolute_tol
    r = int(np.count_nonzero(s > cut))
    return vh[r:].conj().T


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^n, stored as an orthonormal frame of shape (n, k).

    ``k = 0`` frames are legal and represent the zero subspace.
    """

    frame: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.frame, dtype=np.complex128)
        if q.ndim != 2:
            raise InvalidInput("subspace frame must be a 2d array")
        if q.shape[1] > q.shape[0]:
            raise InvalidInput("frame has more columns than ambient dimension")
        if q.shape[1] > 0:
            gram = q.conj().T @ q
            if not np.allclose(gram, np.eye(q.shape[1]), rtol=0.0, atol=max(FRAME_ATOL, 1e-13 * q.shape[0])):
                raise InvalidInput("frame columns are not orthonormal")
        q = q.copy()
        q.setflags(write=False)
        object.__setattr__(self, "frame", q)

    @property
    def ambient_dim(self):
        return self.frame.shape[0]

    @property
    def dim(self):
        return self.frame.shape[1]

    @classmethod
    def from_span(cls, matrix, tol=None):
        """Subspace spanned by the columns of an arbitrary matrix."""
        return cls(orthonormalize(matrix, tol=tol))

    @classmethod
    def zero(cls, ambient_dim):
        return cls(np.zeros((ambient_dim, 0), dtype=np.complex128))

    @classmethod
    def full(cls, ambient_dim):
        return cls(np.eye(ambient_dim, dtype=np.complex128))

    @classmethod
    def from_indices(cls, ambient_dim, indices):
        """Coordinate subspace spanned by the listed basis directions."""
        idx = np.asarray(indices, dtype=int)
        if idx.size != np.unique(idx).size:
            raise InvalidInput("duplicate coordinate indices")
        if idx.size and (idx.min() < 0 or idx.max() >= ambient_dim):
            raise InvalidInput("coordinate index out of range")
        q = np.zeros((ambient_dim, idx.size), dtype=np.complex128)
        for col, j in enumerate(np.sort(idx)):
            q[j, col] = 1.0
        return cls(q)

    def projector(self):
        """The orthogonal projector onto this subspace as a dense matrix."""
        return self.frame @ self.frame.conj().T

    def complement(self):
        return complement(self)

    def intersect(self, other):
        return intersection(self, other)

    def contains(self, other, tol=1e-8):
        """Whether ``other`` (a Subspace or an (n,) vector) lies inside."""
        if isinstance(other, Subspace):
            vecs = other.frame
        else:
            v = np.asarray(other, dtype=np.complex128).reshape(-1, 1)
            nrm = np.linalg.norm(v)
            if nrm == 0:
                return True
            vecs = v / nrm
        if vecs.shape[0] != self.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        if vecs.shape[1] == 0:
            return True
        resid = vecs - self.frame @ (self.frame.conj().T @ vecs)
        return float(np.abs(resid).max()) < tol


def _check_same_ambient(a, b):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(
            f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}"
        )


def principal_cosines(a, b):
    """Cosines of the principal angles between two subspaces, descending."""
    _check_same_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return np.zeros(0)
    s = singular_values(a.frame.conj().T @ b.frame)
    return np.clip(s, 0.0, 1.0)


def _intersection_nullspace(a, b):
    # Absolute threshold: a pair of unit vectors at principal angle theta
    # maps to a stacked singular value of about sqrt(1 - cos theta).
    stacked = np.hstack([a.frame, -b.frame])
    null = nullspace(stacked, absolute_tol=np.sqrt(2.0 * ANGLE_TOL))
    if null.shape[1] == 0:
        return Subspace.zero(a.ambient_dim)
    return Subspace.from_span(a.frame @ null[: a.dim, :])


def intersection(a, b):
    """Intersection of two subspaces of the same ambient space.

    Principal cosines indistinguishable from 1 select the intersection
    directions; any cosine inside the ambiguous band reroutes the whole
    computation through the stacked nullspace, whose answer wins.
    """
    _check_same_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient_dim)
    m = a.frame.conj().T @ b.frame
    u, s, _ = _svd(m)
    s = np.clip(s, 0.0, 1.0)
    gap = 1.0 - s
    if np.any((gap > FRAME_ATOL) & (gap < AMBIGUITY_BAND)):
        return _intersection_nullspace(a, b)
    keep = int(np.count_nonzero(s > 1.0 - ANGLE_TOL))
    if keep == 0:
        return Subspace.zero(a.ambient_dim)
    return Subspace(a.frame @ u[:, :keep])


def subspace_sum(a, b):
    """Span of the union of two subspaces."""
    _check_same_ambient(a, b)
    return Subspace.from_span(np.hstack([a.frame, b.frame]))


def complement(a):
    """Orthogonal complement, via the full SVD of the frame."""
    if a.dim == 0:
        return Subspace.full(a.ambient_dim)
    u, _, _ = _svd(a.frame, full_matrices=True)
    return Subspace(u[:, a.dim:])


@dataclass(frozen=True)
class PairIndexReport:
    """Integer invariants of a pair of subspaces in common ambient space."""

    dim_first: int
    dim_second: int
    ambient_dim: int
    dim_intersection: int
    codim_sum: int
    index: int


def pair_index(a, b):
    """Index of a pair: dim of the intersection minus codim of the sum.

    Both constituents are computed independently; in finite dimension
    the result always equals ``dim a + dim b - ambient``, and the
    acceptance tests check that identity rather than assuming it.
    """
    _check_same_ambient(a, b)
    inter = intersection(a, b)
    # Same absolute scale as the intersection's angle classification, so a
    # borderline direction lands on exactly one side of the count.
    sum_dim = rank(np.hstack([a.frame, b.frame]),
                   absolute_tol=np.sqrt(2.0 * ANGLE_TOL))
    codim = a.ambient_dim - sum_dim
    return PairIndexReport(
        dim_first=a.dim,
        dim_second=b.dim,
        ambient_dim=a.ambient_dim,
        dim_intersection=inter.dim,
        codim_sum=codim,
        index=inter.dim - codim,
    )


@dataclass(frozen=True)
class RestrictionReport:
    """Kernel/cokernel data of an orthogonal projection restricted to a
    subspace, viewed as a map onto the target."""

    rank: int
    kernel_dim: int
    cokernel_dim: int
    index: int


def restricted_projection_index(a, target):
    """Index of ``P_target`` restricted to ``a``, as a map into ``target``.

    Computed from the actual rank of the compressed matrix, not from the
    dimension identity it happens to satisfy.
    """
    _check_same_ambient(a, target)
    m = target.frame.conj().T @ a.frame
    r = rank(m)
    ker = a.dim - r
    coker = target.dim - r
    return RestrictionReport(rank=r, kernel_dim=ker, cokernel_dim=coker,
                             index=ker - coker)


def direct_sum(a, b):
    """Block diagonal subspace of the concatenated ambient space."""
    na, nb = a.ambient_dim, b.ambient_dim
    q = np.zeros((na + nb, a.dim + b.dim), dtype=np.complex128)
    q[:na, : a.dim] = a.frame
    q[na:, a.dim:] = b.frame
    return Subspace(q)


def embed(a, ambient_dim, offset):
    """Place a subspace of C^k at row ``offset`` inside C^ambient_dim."""
    if offset < 0 or offset + a.ambient_dim > ambient_dim:
        raise DimensionMismatch("embedding window does not fit")
    q = np.zeros((ambient_dim, a.dim), dtype=np.complex128)
    q[offset: offset + a.ambient_dim, :] = a.frame
    return Subspace(q)


def subspaces_equal(a, b, tol=1e-8):
    """Whether two subspaces coincide (same dim, all cosines at 1)."""
    _check_same_ambient(a, b)
    if a.dim != b.dim:
        return False
    if a.dim == 0:
        return True
    cos = principal_cosines(a, b)
    return bool(cos.min() > 1.0 - tol)


def random_subspace(ambient_dim, dim, rng):
    """Haar-ish random subspace from a complex gaussian matrix."""
    if dim > ambient_dim:
        raise InvalidInput("dim exceeds ambient dimension")
    if dim == 0:
        return Subspace.zero(ambient_dim)
    g = rng.standard_normal((ambient_dim, dim)) + 1j * rng.standard_normal((ambient_dim, dim))
    out = Subspace.from_span(g)
    if out.dim != dim:
        raise InvalidInput("random matrix was rank deficient")
    return out
