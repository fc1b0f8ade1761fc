"""Correspondences between polarized model spaces: composition, indices,
twists, bordisms, chains, and the composition-defect ledger.

Every index here is a pair index of explicit subspaces.  Operator-index
formulations would be identically zero for square truncations, so the
windowed pair formulation is the load-bearing one, and the classical
operator identities reappear as consistency checks between different
pair computations.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CompositionMismatch, DimensionMismatch, InvalidInput
from .spaces import ModelSpace, convention_predicate, spaces_match
from .subspaces import (
    Subspace,
    complement,
    direct_sum,
    intersection,
    nullspace,
    pair_index,
    rank,
)
from .windows import lift_frame, restricted_image, window_rows_mask, windowed_graph

__all__ = [
    "COMPOSE_DROP_TOL",
    "Correspondence",
    "Twist",
    "Chain",
    "LedgerReport",
    "compose",
    "index",
    "index_report",
    "tilde_ind",
    "delta",
    "delta_direct",
    "chain_total_index",
    "reduce_chain_ledger",
    "compose_with_twist",
    "is_bordism",
    "is_special",
    "apply_to_subspace",
    "twist_graph",
    "graph_correspondence",
]

# Projected directions below this absolute singular value are dropped
# when composing: they are the collapsed middle components that the
# defect ledger accounts for, not noise.
COMPOSE_DROP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Correspondence:
    """A subspace of source + target, viewed as a morphism."""

    source: ModelSpace
    target: ModelSpace
    subspace: Subspace

    def __post_init__(self):
        if self.subspace.ambient_dim != self.source.dim + self.target.dim:
            raise DimensionMismatch(
                "subspace ambient does not equal source dim + target dim")

    @property
    def is_endo(self):
        return spaces_match(self.source, self.target)


def _pairing_subspace(l):
    return direct_sum(l.source.splitting.flat, l.target.splitting.sharp)


def index_report(l):
    """Full pair-index report of a correspondence against the
    flat-source/sharp-target assembly."""
    return pair_index(l.subspace, _pairing_subspace(l))


def index(l):
    """Index of a correspondence: dim of intersection with the
    flat/sharp assembly minus codim of their sum."""
    return index_report(l).index


def compose(l1, l2):
    """Relational composition of correspondences.

    Intersects (L1 + H3) with (H1 + L2) inside H1 + H2 + H3, projects
    onto H1 + H3, and drops directions whose projection collapses below
    an absolute threshold (the lost middle components counted by the
    defect ledger).
    """
    if not spaces_match(l1.target, l2.source):
        raise CompositionMismatch("target of first does not match source of second")
    n1, n2, n3 = l1.source.dim, l1.target.dim, l2.target.dim
    a = direct_sum(l1.subspace, Subspace.full(n3))
    b = direct_sum(Subspace.full(n1), l2.subspace)
    inter = intersection(a, b)
    keep = np.concatenate([
        np.ones(n1, dtype=bool),
        np.zeros(n2, dtype=bool),
        np.ones(n3, dtype=bool),
    ])
    projected = inter.frame[keep, :]
    if projected.shape[1] == 0:
        sub = Subspace.zero(n1 + n3)
    else:
        u, s, _ = np.linalg.svd(projected, full_matrices=False)
        r = int(np.count_nonzero(s > COMPOSE_DROP_TOL))
        sub = Subspace(u[:, :r])
    return Correspondence(source=l1.source, target=l2.target, subspace=sub)


@dataclass(frozen=True, eq=False)
class Twist:
    """An invertible windowed operator on one model space, almost
    commuting with its polarization.

    ``budget`` bounds the rank of the commutator with the sharp
    projector; pass None to skip that check (useful when re-basing a
    twist onto a perturbed splitting, which inflates the commutator by
    the perturbation rank).
    """

    base: ModelSpace
    operator: object
    symbol: object = None
    budget: int = None

    def __post_init__(self):
        op = self.operator
        if self.base.window is None:
            raise InvalidInput("twist base must carry a mode window")
        if op.base_window != self.base.window:
            raise DimensionMismatch("operator base window does not match space")
        if rank(op.matrix) < op.domain_window.dim:
            raise InvalidInput("windowed operator is not injective on its domain")
        if self.budget is not None:
            if commutator_rank(self) > self.budget:
                raise InvalidInput("twist commutator exceeds its rank budget")

    @property
    def margin(self):
        return self.operator.domain_window.half_width - self.base.window.half_width

    def base_square_matrix(self):
        """The base-to-base compression of the operator."""
        rows = self.operator.base_rows_mask()
        cols = self.operator.base_columns_mask()
        return self.operator.matrix[np.ix_(rows, cols)]

    def with_base_splitting(self, splitting):
        return Twist(base=self.base.with_splitting(splitting),
                     operator=self.operator, symbol=self.symbol, budget=None)


def commutator_rank(t):
    """Rank of the commutator of the compressed operator with the sharp
    projector of the base splitting."""
    b = t.base_square_matrix()
    p = t.base.splitting.sharp.projector()
    return rank(p @ b - b @ p)


def tilde_ind(t):
    """Twist index: the padded flat half is pushed through the operator,
    intersected with the window, and paired against the sharp half.

    Equals the winding number of the symbol determinant on circle
    models whose sharp half is the nonnegative-mode span.
    """
    flat_pad = t.base.flat_padded(t.margin)
    image = t.operator.apply_within_window(flat_pad.padded)
    return pair_index(image, t.base.splitting.sharp).index


def twist_graph(t):
    """The twist as an endo-correspondence: pairs (x, op x) that stay in
    the window."""
    cols = t.operator.base_columns_mask()
    m = t.operator.matrix[:, cols]
    sub = windowed_graph(m, t.operator.base_rows_mask())
    return Correspondence(source=t.base, target=t.base, subspace=sub)


def graph_correspondence(space, matrix, target=None):
    """Graph of an exact square matrix as a correspondence."""
    target = target or space
    m = np.asarray(matrix, dtype=np.complex128)
    if m.shape != (target.dim, space.dim):
        raise DimensionMismatch("matrix does not map source to target")
    stacked = np.vstack([np.eye(space.dim, dtype=np.complex128), m])
    return Correspondence(source=space, target=target,
                          subspace=Subspace.from_span(stacked))


def delta(l1, l2):
    """Composition defect Ind(l1) + Ind(l2) - Ind(l2 after l1).

    Splitting-independent: the shared endpoint enters through the sum of
    its sharp and flat dimensions only.
    """
    return index(l1) + index(l2) - index(compose(l1, l2))


def delta_direct(l1, l2):
    """Kernel and cokernel contributions to the composition defect.

    Returns (dim of middle vectors annihilated on both outer slots,
    the same count for the orthocomplements).  The defect equals
    kernel_part - cokernel_part; the combination sign was fixed by a
    disambiguating oracle instance and is pinned in the convention
    manifest.
    """
    if not spaces_match(l1.target, l2.source):
        raise CompositionMismatch("pair is not composable")
    n1, n2 = l1.source.dim, l1.target.dim
    n3 = l2.target.dim

    def middle_slice(sub, first_dim, keep_second):
        mask = np.zeros(sub.ambient_dim, dtype=bool)
        if keep_second:
            mask[first_dim:] = True
        else:
            mask[:first_dim] = True
        return restricted_image(sub.frame, mask)

    y1 = middle_slice(l1.subspace, n1, True)
    y2 = middle_slice(l2.subspace, n2, False)
    kernel_part = intersection(y1, y2).dim
    y1c = middle_slice(complement(l1.subspace), n1, True)
    y2c = middle_slice(complement(l2.subspace), n2, False)
    cokernel_part = intersection(y1c, y2c).dim
    return kernel_part, cokernel_part


@dataclass(frozen=True, eq=False)
class Chain:
    """A run of correspondences from the zero space back to the zero
    space; endpoints of consecutive links must be the same model space."""

    links: tuple

    def __post_init__(self):
        links = tuple(self.links)
        if not links:
            raise InvalidInput("chain needs at least one link")
        if not links[0].source.is_zero:
            raise InvalidInput("chain must start at the zero space")
        if not links[-1].target.is_zero:
            raise InvalidInput("chain must end at the zero space")
        for a, b in zip(links, links[1:]):
            if not spaces_match(a.target, b.source):
                raise CompositionMismatch("adjacent links do not share their endpoint")
        object.__setattr__(self, "links", links)

    def __len__(self):
        return len(self.links)


def chain_total_index(c):
    """Sum of the link indices."""
    return sum(index(l) for l in c.links)


@dataclass(frozen=True)
class LedgerReport:
    """Record of one full reduction of a chain: the defect of each
    composition event and the index of the final closed-up morphism."""

    junctions: tuple
    delta_events: tuple
    final_index: int
    total: int


def reduce_chain_ledger(c, order):
    """Compose the chain down to a single zero-to-zero morphism in the
    given junction order, ledgering the defect of every event.

    ``order`` is a permutation of the original junction ids 0..len-2
    (junction i sits between links i and i+1).  The total of all defect
    events plus the final index must reproduce the chain total no matter
    the order; the suite checks that equality over all orders.
    """
    n_junctions = len(c) - 1
    if sorted(order) != list(range(n_junctions)):
        raise InvalidInput("order must be a permutation of the junction ids")
    links = list(c.links)
    junction_ids = list(range(n_junctions))
    events = []
    for j in order:
        pos = junction_ids.index(j)
        d = delta(links[pos], links[pos + 1])
        events.append(d)
        links[pos: pos + 2] = [compose(links[pos], links[pos + 1])]
        junction_ids.pop(pos)
    final = links[0]
    if not (final.source.is_zero and final.target.is_zero):
        raise InvalidInput("reduction did not terminate at a closed morphism")
    final_index = index(final)
    return LedgerReport(
        junctions=tuple(order),
        delta_events=tuple(events),
        final_index=final_index,
        total=sum(events) + final_index,
    )


def _slot_companion_frame(l, slot, margin):
    """Orthonormal frame of the correspondence subspace extended by
    margin modes on one endpoint slot.

    The extension follows the bordism model: the source slot continues
    along its sharp predicate, the target slot along its flat one.
    Margin indicators are disjoint in support from the lifted frame, so
    the stack stays orthonormal.
    """
    n1 = l.source.dim
    if slot == "source":
        space, rows = l.source, slice(0, n1)
        other_first = False
        pred = convention_predicate(space.convention)
    else:
        space, rows = l.target, slice(n1, None)
        other_first = True
        pred = convention_predicate(space.convention)
        flat_pred = lambda n, p=pred: not p(n)
        pred = flat_pred
    if space.window is None or space.convention is None:
        raise InvalidInput("twisted endpoint has no window/convention")
    w = space.window
    padded_w = w.pad(margin)
    other_dim = l.subspace.ambient_dim - space.dim
    lifted_block = lift_frame(l.subspace.frame[rows, :], w, padded_w)
    other_block = l.subspace.frame[slice(n1, None) if slot == "source" else slice(0, n1), :]
    labels = padded_w.mode_labels()
    extras = []
    for i in range(padded_w.dim):
        n = int(labels[i])
        if abs(n) > w.half_width and pred(n):
            e = np.zeros((other_dim + padded_w.dim, 1), dtype=np.complex128)
            e[(other_dim + i) if other_first else i, 0] = 1.0
            extras.append(e)
    if other_first:
        main = np.vstack([other_block, lifted_block])
    else:
        main = np.vstack([lifted_block, other_block])
    return np.hstack([main] + extras) if extras else main


def compose_with_twist(t, l, side):
    """Index of the correspondence composed with a windowed twist.

    ``side`` is "pre" (twist feeds into the correspondence) or "post"
    (twist applied after it).  The twisted endpoint of the subspace is
    first extended by its margin companion, so boundary modes shifted
    across the window edge are not clipped; for correspondences that
    are bounded perturbations of the reference polarization the result
    equals index(l) + tilde_ind(t) with the twist's own base splitting.
    """
    op = t.operator
    cols = op.base_columns_mask()
    if side == "pre":
        if not spaces_match(t.base, l.source):
            raise CompositionMismatch("twist base does not match the source")
        # (x, y) with op x + y inside the doubly padded companion of L
        comp_frame = _slot_companion_frame(l, "source", 2 * t.margin)
        comp = Subspace(comp_frame) if comp_frame.shape[1] \
            else Subspace.zero(comp_frame.shape[0])
        n_t = l.target.dim
        p_perp = np.eye(comp.ambient_dim) - comp.projector()
        b = np.zeros((comp.ambient_dim, t.base.dim + n_t), dtype=np.complex128)
        b[: op.range_window.dim, : t.base.dim] = op.matrix[:, cols]
        b[op.range_window.dim:, t.base.dim:] = np.eye(n_t)
        sub = Subspace.from_span(nullspace(p_perp @ b))
        composite = Correspondence(source=t.base, target=l.target, subspace=sub)
        return index(composite)
    if side == "post":
        if not spaces_match(t.base, l.target):
            raise CompositionMismatch("twist base does not match the target")
        comp_frame = _slot_companion_frame(l, "target", t.margin)
        n_s = l.source.dim
        big = np.zeros((n_s + op.range_window.dim, comp_frame.shape[0]),
                       dtype=np.complex128)
        big[:n_s, :n_s] = np.eye(n_s)
        big[n_s:, n_s:] = op.matrix
        keep = np.concatenate([
            np.ones(n_s, dtype=bool),
            window_rows_mask(op.range_window, t.base.window),
        ])
        sub = restricted_image(big @ comp_frame, keep)
        composite = Correspondence(source=l.source, target=t.base, subspace=sub)
        return index(composite)
    raise InvalidInput("side must be 'pre' or 'post'")


def is_bordism(l, rank_budget):
    """Whether the correspondence projector is a bounded-rank
    perturbation of sharp-source + flat-target.

    Directions count against the budget only when tilted past 30
    degrees (singular value of the projector difference above 0.5);
    a relative cutoff would count every slightly tilted window mode.
    """
    p_l = l.subspace.projector()
    model = direct_sum(l.source.splitting.sharp, l.target.splitting.flat)
    d = p_l - model.projector()
    if d.size == 0:
        return True
    sv = np.linalg.svd(d, compute_uv=False)
    return int(np.count_nonzero(sv > 0.5)) <= rank_budget


def is_special(l):
    """Whether the source projection is a bijection from the
    correspondence onto the source and the target projection is onto."""
    n1 = l.source.dim
    rows1 = l.subspace.frame[:n1, :]
    rows2 = l.subspace.frame[n1:, :]
    r1 = rank(rows1)
    return r1 == l.subspace.dim and r1 == n1 and rank(rows2) == l.target.dim


def apply_to_subspace(l, a):
    """Image {y : exists x in a with (x, y) in L} of a subspace under
    the correspondence."""
    n1 = l.source.dim
    if a.ambient_dim != n1:
        raise DimensionMismatch("subspace does not live in the source")
    inter = intersection(l.subspace, direct_sum(a, Subspace.full(l.target.dim)))
    projected = inter.frame[n1:, :]
    if projected.shape[1] == 0:
        return Subspace.zero(l.target.dim)
    u, s, _ = np.linalg.svd(projected, full_matrices=False)
    r = int(np.count_nonzero(s > COMPOSE_DROP_TOL))
    return Subspace(u[:, :r])
