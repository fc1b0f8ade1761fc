"""Weighted Laurent-mode circles and the exactly solvable geometry on
them: disk and annulus correspondences, multiplication twists, winding
numbers, and the sphere/torus scenario builders.

Mode bases are normalized per mode (the mode-k vector on a circle of
radius r carries the factor r^k), so circle subspaces are plain
coordinate spans and every index is radius-independent; radii survive
only in the annulus transfer factors q^n.

Two splitting conventions are in play, chosen per circle role: circles
that cap chains take sharp = negative modes (incoming disk index 0,
outgoing disk index 1), while twist, bordism, and graph-edge circles
take sharp = nonnegative modes (twist index = winding number).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvalidInput, SymbolSingular
from .morphisms import Chain, Correspondence, Twist
from .spaces import (
    SHARP_NEGATIVE,
    SHARP_NONNEG,
    ModelSpace,
    nfold_subspace,
    splitting_for_window,
)
from .subspaces import Subspace, pair_index
from .windows import ModeWindow, WindowedOperator, lift_frame, mode_span

__all__ = [
    "LaurentSymbol",
    "LaurentCircle",
    "chain_circle",
    "twist_circle",
    "multiplication_operator",
    "symbol_band_matrix",
    "symbol_twist",
    "symbol_inverse",
    "winding_number",
    "disk_correspondence",
    "annulus_correspondence",
    "annulus_transfer_factors",
    "twisted_cap",
    "build_sphere_chain",
    "build_torus",
    "weighted_diagonal",
    "sphere_hardy_pair",
    "mv_pairing",
    "random_laurent_symbol",
    "stabilization_m0",
]

# Grid sizes for circle sampling.
VALIDATION_GRID = 512
WINDING_GRID = 1024
WINDING_GRID_CAP = 2 ** 20
MIN_DET = 1e-8


def _unit_grid(n):
    return np.exp(2j * np.pi * np.arange(n) / n)


@dataclass(frozen=True, eq=False)
class LaurentSymbol:
    """A matrix of Laurent polynomials: coeffs[p] is the coefficient
    matrix of z**(d_min + p).

    Construction validates invertibility on the unit circle by sampling
    the determinant on a fixed grid.
    """

    coeffs: np.ndarray
    d_min: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] == 0:
            raise InvalidInput("coefficients must have shape (powers, c, c)")
        # canonicalize: strip zero planes at both ends
        nz = [p for p in range(c.shape[0]) if np.any(np.abs(c[p]) > 0)]
        if not nz:
            raise SymbolSingular("symbol is identically zero")
        lo, hi = nz[0], nz[-1]
        d_min = self.d_min + lo
        c = c[lo: hi + 1].copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "d_min", int(d_min))
        dets = _kernels.det_grid(self.eval_grid(_unit_grid(VALIDATION_GRID)))
        if float(np.abs(dets).min()) <= MIN_DET:
            raise SymbolSingular("symbol determinant vanishes on the circle")

    @property
    def channels(self):
        return self.coeffs.shape[1]

    @property
    def d_max(self):
        return self.d_min + self.coeffs.shape[0] - 1

    @property
    def degree(self):
        return max(abs(self.d_min), abs(self.d_max))

    @classmethod
    def identity(cls, channels=1):
        return cls(coeffs=np.eye(channels, dtype=np.complex128)[None, :, :], d_min=0)

    @classmethod
    def monomial(cls, k, channels=1, coefficient=1.0):
        return cls(coeffs=(coefficient * np.eye(channels, dtype=np.complex128))[None, :, :],
                   d_min=k)

    @classmethod
    def scalar(cls, coefficients, d_min):
        """Scalar symbol from a coefficient list for powers d_min..."""
        c = np.asarray(coefficients, dtype=np.complex128).reshape(-1, 1, 1)
        return cls(coeffs=c, d_min=d_min)

    @classmethod
    def from_entries(cls, entries):
        """Matrix symbol from per-entry (offset, coefficient list) pairs.

        ``entries[i][j]`` describes the (i, j) matrix element.
        """
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise InvalidInput("entry table must be square")
        los, his = [], []
        for row in entries:
            for off, coeffs in row:
                if len(coeffs) == 0:
                    continue
                los.append(off)
                his.append(off + len(coeffs) - 1)
        if not los:
            raise SymbolSingular("symbol is identically zero")
        lo, hi = min(los), max(his)
        c = np.zeros((hi - lo + 1, n, n), dtype=np.complex128)
        for i, row in enumerate(entries):
            for j, (off, coeffs) in enumerate(row):
                for p, val in enumerate(coeffs):
                    c[off - lo + p, i, j] += val
        return cls(coeffs=c, d_min=lo)

    def eval(self, z):
        return self.eval_grid(np.array([z]))[0]

    def eval_grid(self, zs):
        return _kernels.eval_symbol_grid(self.coeffs, self.d_min, np.asarray(zs))

    def det_on_grid(self, n):
        return _kernels.det_grid(self.eval_grid(_unit_grid(n)))

    def product(self, other):
        """Pointwise matrix product self(z) @ other(z)."""
        if self.channels != other.channels:
            raise DimensionMismatch("channel counts differ")
        pa, pb = self.coeffs.shape[0], other.coeffs.shape[0]
        out = np.zeros((pa + pb - 1, self.channels, self.channels),
                       dtype=np.complex128)
        for a in range(pa):
            for b in range(pb):
                out[a + b] += self.coeffs[a] @ other.coeffs[b]
        return LaurentSymbol(coeffs=out, d_min=self.d_min + other.d_min)


def symbol_inverse(sym, tol=1e-9):
    """Pointwise inverse of a symbol, when it is again a Laurent polynomial.

    That happens exactly when the determinant is a single monomial c z^m
    (then the adjugate divided by the determinant has finitely many
    powers).  Coefficients are recovered by trigonometric interpolation
    on the unit circle and validated by multiplying back.
    """
    c = sym.channels
    span = (sym.coeffs.shape[0] - 1) * c
    n = max(span + 1, 4)
    zs = _unit_grid(n)
    dets = _kernels.det_grid(sym.eval_grid(zs))
    # det powers live in [c*d_min, c*d_min + span]
    powers = c * sym.d_min + np.arange(span + 1)
    coeffs = np.array([np.mean(dets * zs ** (-p)) for p in powers])
    big = np.flatnonzero(np.abs(coeffs) > tol)
    if len(big) != 1:
        raise SymbolSingular("determinant is not a monomial; the inverse "
                             "is not a Laurent polynomial")
    m = int(powers[big[0]])
    lo = (c - 1) * sym.d_min - m
    span_inv = (c - 1) * (sym.coeffs.shape[0] - 1)
    n2 = max(span_inv + 1, 4)
    zs2 = _unit_grid(n2)
    vals = np.linalg.inv(sym.eval_grid(zs2))
    out = np.zeros((span_inv + 1, c, c), dtype=np.complex128)
    for j in range(span_inv + 1):
        out[j] = np.mean(vals * (zs2 ** (-(lo + j)))[:, None, None], axis=0)
    out[np.abs(out) < 1e-12] = 0.0
    inv = LaurentSymbol(coeffs=out, d_min=lo)
    check = sym.product(inv)
    ident = np.zeros_like(check.coeffs)
    if check.d_min <= 0 <= check.d_max:
        ident[-check.d_min] = np.eye(c)
    if not np.allclose(check.coeffs, ident, atol=1e-8):
        raise SymbolSingular("inverse validation failed")
    return inv


def winding_number(sym, grid=WINDING_GRID):
    """Winding of the symbol determinant around zero.

    Accumulates argument steps on a uniform circle grid, doubling the
    grid while any single step exceeds pi/2.  Exact for polynomial
    symbols of moderate degree; a persistent large step or a near-zero
    determinant means the symbol is effectively singular.
    """
    n = grid
    while True:
        dets = sym.det_on_grid(n)
        if float(np.abs(dets).min()) <= MIN_DET:
            raise SymbolSingular("determinant too close to zero on the grid")
        total, max_step = _kernels.phase_scan(dets)
        if max_step <= math.pi / 2:
            w = total / (2.0 * math.pi)
            return int(round(w))
        n *= 2
        if n > WINDING_GRID_CAP:
            raise SymbolSingular("winding did not stabilize under refinement")


@dataclass(frozen=True)
class LaurentCircle:
    """A windowed Laurent-mode circle: modes -half_width..half_width in
    each channel, with a named splitting convention."""

    half_width: int
    radius: float = 1.0
    channels: int = 1
    convention: str = SHARP_NONNEG

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidInput("radius must be positive")
        if self.half_width < 1:
            raise InvalidInput("window must contain at least modes -1..1")

    @property
    def window(self):
        return ModeWindow(self.half_width, self.channels)

    def labels(self):
        w = self.window
        if self.channels == 1:
            return tuple(int(n) for n in w.mode_labels())
        return tuple((int(w.mode_of_index(i)[1]), w.mode_of_index(i)[0])
                     for i in range(w.dim))

    def shift_generator(self):
        """Truncated multiplication by z inside the window (per channel)."""
        w = self.window
        m = np.zeros((w.dim, w.dim), dtype=np.complex128)
        for c in range(self.channels):
            for n in range(-self.half_width, self.half_width):
                m[w.index_of(c, n + 1), w.index_of(c, n)] = 1.0
        return m

    def space(self):
        w = self.window
        return ModelSpace(
            dim=w.dim,
            basis_labels=self.labels(),
            splitting=splitting_for_window(w, self.convention),
            algebra_generators=(self.shift_generator(),),
            window=w,
            convention=self.convention,
        )


def chain_circle(half_width, radius=1.0, channels=1):
    """Circle in the convention used by chain caps (sharp = n < 0)."""
    return LaurentCircle(half_width, radius, channels, SHARP_NEGATIVE)


def twist_circle(half_width, radius=1.0, channels=1):
    """Circle in the convention used by twists and graph edges."""
    return LaurentCircle(half_width, radius, channels, SHARP_NONNEG)


def symbol_band_matrix(sym, from_window, to_window):
    """Exact matrix of multiplication by a symbol between two windows.

    The target window must be wide enough that no output mode of any
    input mode is truncated.
    """
    if sym.channels != from_window.channels:
        raise DimensionMismatch("symbol channels do not match the window")
    if to_window.half_width < from_window.half_width + sym.degree:
        raise DimensionMismatch("target window truncates the symbol action")
    m = np.zeros((to_window.dim, from_window.dim), dtype=np.complex128)
    for p in range(sym.coeffs.shape[0]):
        shift = sym.d_min + p
        coef = sym.coeffs[p]
        for cin in range(sym.channels):
            for cout in range(sym.channels):
                v = coef[cout, cin]
                if v == 0:
                    continue
                for n in range(-from_window.half_width,
                               from_window.half_width + 1):
                    t = n + shift
                    m[to_window.index_of(cout, t),
                      from_window.index_of(cin, n)] += v
    return m


def multiplication_operator(sym, base_window):
    """Windowed operator of multiplication by a Laurent symbol.

    The domain is the base window padded by the symbol degree; the range
    is padded by twice the degree so that no output mode of any padded
    input is truncated.
    """
    d = sym.degree
    domain = base_window.pad(d)
    rng_w = base_window.pad(2 * d)
    m = symbol_band_matrix(sym, domain, rng_w)
    return WindowedOperator(domain_window=domain, range_window=rng_w,
                            base_window=base_window, matrix=m)


def symbol_twist(sym, circle):
    """The multiplication twist of a symbol on a circle model.

    The commutator budget defaults to twice the symbol degree per
    channel, which is the structural bound for the band the commutator
    occupies around the splitting cut.
    """
    if sym.channels != circle.channels:
        raise DimensionMismatch("symbol channels do not match the circle")
    op = multiplication_operator(sym, circle.window)
    budget = 2 * sym.degree * sym.channels
    return Twist(base=circle.space(), operator=op, symbol=sym, budget=budget)


def disk_correspondence(circle, side):
    """Cauchy data of a disk glued along the circle.

    The incoming disk contributes the nonnegative modes as a morphism
    out of the zero space; the outgoing disk contributes the
    nonpositive modes into the zero space.
    """
    space = circle.space()
    zero = ModelSpace.zero_space()
    if side == "incoming":
        sub = mode_span(circle.window, lambda n: n >= 0)
        return Correspondence(source=zero, target=space, subspace=sub)
    if side == "outgoing":
        sub = mode_span(circle.window, lambda n: n <= 0)
        return Correspondence(source=space, target=zero, subspace=sub)
    raise InvalidInput("side must be 'incoming' or 'outgoing'")


def _diagonal_pair_frame(dim_per_side, window, q):
    """Frame of {(x, Q x)} with Q = diag(q^mode), normalized per mode."""
    frame = np.zeros((2 * dim_per_side, dim_per_side), dtype=np.complex128)
    labels = window.mode_labels()
    for i in range(dim_per_side):
        n = int(labels[i])
        # stable per-mode normalization of (1, q^n)
        if n >= 0:
            a, b = 1.0, q ** n
        else:
            a, b = q ** (-n), 1.0
        norm = math.hypot(a, b)
        frame[i, i] = a / norm
        frame[dim_per_side + i, i] = b / norm
    return frame


def annulus_transfer_factors(outer, inner):
    """Per-mode coefficient transfer factors q^n from the outer circle
    to the inner one; bounded for nonnegative modes, growing for
    negative ones."""
    q = inner.radius / outer.radius
    return q ** outer.window.mode_labels().astype(float)


def annulus_correspondence(outer, inner):
    """Cauchy data of the annulus between two circles, as the graph of
    the diagonal mode-transfer map from the outer to the inner circle."""
    if outer.half_width != inner.half_width or outer.channels != inner.channels:
        raise DimensionMismatch("annulus circles must share window and channels")
    if outer.radius <= inner.radius:
        raise InvalidInput("outer radius must exceed inner radius")
    q = inner.radius / outer.radius
    w = outer.window
    frame = _diagonal_pair_frame(w.dim, w, q)
    return Correspondence(source=outer.space(), target=inner.space(),
                          subspace=Subspace(frame))


def _pad_by_predicate(sub, window, margin, predicate):
    """Canonical padded companion of a coordinate-supported subspace:
    embed the frame and append the margin modes allowed by the
    predicate."""
    padded_window = window.pad(margin)
    lifted = lift_frame(sub.frame, window, padded_window)
    labels = padded_window.mode_labels()
    cols = [lifted]
    for i in range(padded_window.dim):
        n = int(labels[i])
        if abs(n) > window.half_width and predicate(n):
            e = np.zeros((padded_window.dim, 1), dtype=np.complex128)
            e[i, 0] = 1.0
            cols.append(e)
    return Subspace(np.hstack(cols))


def twisted_cap(circle, sym):
    """Outgoing disk whose Cauchy data is pushed through a symbol.

    The symbol acts on the padded nonpositive half before the window
    intersection, so the cap absorbs the full transmission data; its
    index moves by exactly the winding number.
    """
    space = circle.space()
    zero = ModelSpace.zero_space()
    cap = mode_span(circle.window, lambda n: n <= 0)
    if sym is None:
        return Correspondence(source=space, target=zero, subspace=cap)
    op = multiplication_operator(sym, circle.window)
    margin = op.domain_window.half_width - circle.half_width
    padded = _pad_by_predicate(cap, circle.window, margin, lambda n: n <= 0)
    sub = op.apply_within_window(padded)
    return Correspondence(source=space, target=zero, subspace=sub)


def build_sphere_chain(half_width, twists=(), radii=(2.0, 1.0)):
    """The sphere cut into two disks and an annulus, with optional
    transmission symbols.

    All inserted symbols are composed onto the outgoing cap: a
    symmetric graph-type link cannot carry a winding inside a finite
    window (its dimension count forces the wrong sign), while the cap
    construction adds exactly the total winding to the chain index.
    """
    r1, r2 = radii
    outer = chain_circle(half_width, r1)
    inner = chain_circle(half_width, r2)
    prod = None
    for sym in twists:
        if sym.channels != 1:
            raise InvalidInput("sphere chain twists must be scalar symbols")
        prod = sym if prod is None else prod.product(sym)
    return Chain(links=(
        disk_correspondence(outer, "incoming"),
        annulus_correspondence(outer, inner),
        twisted_cap(inner, prod),
    ))


def weighted_diagonal(circle, q):
    """Endo-correspondence {(a, Q a)} with Q = diag(q^mode)."""
    w = circle.window
    frame = _diagonal_pair_frame(w.dim, w, q)
    space = circle.space()
    return Correspondence(source=space, target=space, subspace=Subspace(frame))


def build_torus(q, k, half_width):
    """Self-gluing data of the torus model: the weighted diagonal over
    one circle and the monomial twist z^k along the gluing."""
    if not (0.0 < q < 1.0):
        raise InvalidInput("weight q must lie strictly between 0 and 1")
    circle = twist_circle(half_width)
    l = weighted_diagonal(circle, q)
    t = symbol_twist(LaurentSymbol.monomial(k), circle)
    return l, t


def sphere_hardy_pair(half_width):
    """The two disk-side mode subspaces of one circle window."""
    w = ModeWindow(half_width)
    return (mode_span(w, lambda n: n < 0), mode_span(w, lambda n: n >= 0))


def mv_pairing(sphere_pair, sym, n, flat_predicate=None):
    """Boundary pairing of a symbol against a two-disk decomposition.

    Applies the symbol to the n-fold negative half (padded, then window
    intersected) and compares the resulting pair index with n copies of
    the untwisted one.
    """
    h_minus, h_plus = sphere_pair
    if h_minus.ambient_dim != h_plus.ambient_dim:
        raise DimensionMismatch("pair halves live in different spaces")
    if h_minus.ambient_dim % 2 != 1:
        raise InvalidInput("pair must live on a symmetric mode window")
    if sym.channels != n:
        raise DimensionMismatch("symbol must have n channels")
    if flat_predicate is None:
        flat_predicate = lambda m: m < 0
    half = h_minus.ambient_dim // 2
    window = ModeWindow(half, channels=n)
    stacked_minus = nfold_subspace(h_minus, n)
    stacked_plus = nfold_subspace(h_plus, n)
    op = multiplication_operator(sym, window)
    margin = op.domain_window.half_width - half
    padded = _pad_by_predicate(stacked_minus, window, margin, flat_predicate)
    image = op.apply_within_window(padded)
    twisted = pair_index(image, stacked_plus).index
    base = pair_index(h_minus, h_plus).index
    return twisted - n * base


def _unipotent_factor(rng, channels, degree, upper):
    # det == 1 identically: triangular nilpotent part, nonnegative powers only
    coeffs = np.zeros((degree + 1, channels, channels), dtype=np.complex128)
    coeffs[0] = np.eye(channels)
    for p in range(degree + 1):
        block = rng.standard_normal((channels, channels)) \
            + 1j * rng.standard_normal((channels, channels))
        coeffs[p] += 0.6 * (np.triu(block, k=1) if upper else np.tril(block, k=-1))
    return LaurentSymbol(coeffs=coeffs, d_min=0)


def random_laurent_symbol(rng, channels=1, degree=2):
    """Random invertible Laurent matrix symbol with a known structure.

    Built as U D(z) P(z) V (or U P(z) D(z) V), with D a diagonal of nonzero
    monomials c_i z^{k_i}, P a product of unipotent triangular factors whose
    entries use nonnegative powers of z only, and U, V constant unitaries.
    det A is then a constant times z^{sum k_i}, so the symbol is invertible
    on every circle and the monomial-normalized determinant has no zeros
    near the unit circle.  That keeps the windowed twist index of these
    symbols exactly stable at moderate window sizes; symbols with
    determinant zeros just inside the circle would need windows growing
    like log(tol)/log|zero| before their index settles.
    """
    ks = rng.integers(-1, 2, size=channels)
    pbud = max(degree - 1, 0)
    up_deg = int(rng.integers(0, pbud + 1))
    d = np.zeros((3, channels, channels), dtype=np.complex128)
    for i, k in enumerate(ks):
        c = 0.5 + rng.uniform(0.0, 1.5) * np.exp(2j * np.pi * rng.uniform())
        d[int(k) + 1, i, i] = c
    diag = LaurentSymbol(coeffs=d, d_min=-1)
    mix = _unipotent_factor(rng, channels, up_deg, upper=True).product(
        _unipotent_factor(rng, channels, pbud - up_deg, upper=False))
    sym = diag.product(mix) if rng.random() < 0.5 else mix.product(diag)
    if channels > 1:
        u, _ = np.linalg.qr(rng.standard_normal((channels, channels))
                            + 1j * rng.standard_normal((channels, channels)))
        v, _ = np.linalg.qr(rng.standard_normal((channels, channels))
                            + 1j * rng.standard_normal((channels, channels)))
        c = sym.coeffs.copy()
        for p in range(c.shape[0]):
            c[p] = u @ c[p] @ v
        sym = LaurentSymbol(coeffs=c, d_min=sym.d_min)
    return sym


def stabilization_m0(degree, k=0):
    """Smallest window at which circle-model indices are stable."""
    return 2 * (degree + abs(k)) + 2
