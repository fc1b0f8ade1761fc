"""Directed multigraphs of domains glued along circles, and the index of
the associated transmission problem by three routes: vertex/edge
additivity, a fan over the edge direct sum, and self-gluing for
one-loop graphs.

Each edge carries a windowed circle model with its own splitting; each
vertex carries the boundary-value subspace of its domain inside the
ordered direct sum of its incident edge blocks (outgoing blocks first,
then incoming, each sorted by edge identifier).  Incoming-assembly
blocks take the sharp half on outgoing edges and the flat half on
incoming ones; the outgoing assembly is the complement blockwise.

Edge twists enter the additive route through the twist index of the
edge symbol and enter the fan route by composition onto the vertex
data of the edge's target vertex: the target block holds the flat half,
and only flat-side blocks can absorb a winding inside a finite window
(the sharp side loses the same dimensions the twist index gains, which
is the same asymmetry that makes chain builders push their twists onto
the outgoing cap).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, DimensionMismatch, SelfLoopUnsupported
from .fans import Fan, TwistChain, fan_index, plain_ambient_space
from .morphisms import tilde_ind, twist_graph
from .subspaces import Subspace, pair_index
from .windows import ModeWindow

__all__ = [
    "GraphEdge",
    "DecompositionGraph",
    "boundary_slots",
    "incoming_assembly",
    "outgoing_assembly",
    "vertex_subspace",
    "vertex_index",
    "edge_index",
    "global_index_additive",
    "global_index_fan",
    "global_index_selfglue",
    "has_self_loops",
    "to_dot",
    "sphere_path_graph",
    "torus_graph",
    "random_graph",
    "subdivide_edge",
    "flip_edge",
    "perturb_edge_splittings",
    "materialize",
]


@dataclass(frozen=True, eq=False)
class GraphEdge:
    """One oriented gluing circle: endpoints, circle model, optional twist."""

    source: object
    target: object
    space: object
    twist: object = None


@dataclass(frozen=True, eq=False)
class DecompositionGraph:
    """Vertices, identified edges, and per-vertex boundary data.

    ``edges`` maps sortable edge identifiers to :class:`GraphEdge`;
    ``vertex_data`` maps each vertex either to a plain Subspace of its
    boundary space or to a :class:`fans.TwistChain` recipe applied to
    the incoming assembly (the only form the twisted fan route can
    compose onto).
    """

    vertices: tuple
    edges: dict = field(default_factory=dict)
    vertex_data: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise InvalidInput("duplicate vertices")
        half = None
        for eid, e in self.edges.items():
            if e.source not in vs or e.target not in vs:
                raise InvalidInput(f"edge {eid!r} has endpoint outside the graph")
            sp = e.space
            if sp.window is None or sp.convention is None:
                raise InvalidInput(f"edge {eid!r} space has no window/convention")
            if sp.window.channels != 1:
                raise InvalidInput("edge circles must be scalar (one channel)")
            if half is None:
                half = sp.window.half_width
            elif sp.window.half_width != half:
                raise InvalidInput("all edge windows must share one half width")
            if e.twist is not None and e.twist.base.dim != sp.dim:
                raise DimensionMismatch(
                    f"edge {eid!r} twist does not act on its circle")
        for v in self.vertices:
            if v not in self.vertex_data:
                raise InvalidInput(f"vertex {v!r} has no boundary data")
            data = self.vertex_data[v]
            if isinstance(data, Subspace):
                need = sum(self.edges[e].space.dim
                           for e, _ in boundary_slots(self, v))
                if data.ambient_dim != need:
                    raise DimensionMismatch(
                        f"data of vertex {v!r} has ambient {data.ambient_dim},"
                        f" boundary space has dimension {need}")
            elif not isinstance(data, TwistChain):
                raise InvalidInput(
                    "vertex data must be a Subspace or a TwistChain recipe")

    @property
    def half_width(self):
        for e in self.edges.values():
            return e.space.window.half_width
        return None


def boundary_slots(g, v):
    """Ordered (edge id, role) blocks of the boundary space of ``v``:
    outgoing blocks first, each group sorted by edge id.  A self-loop
    contributes one block of each role."""
    out = sorted(eid for eid, e in g.edges.items() if e.source == v)
    inc = sorted(eid for eid, e in g.edges.items() if e.target == v)
    return tuple((eid, "out") for eid in out) + tuple((eid, "in") for eid in inc)


def _vertex_window(g, v):
    slots = boundary_slots(g, v)
    if not slots:
        return None
    return ModeWindow(g.half_width, channels=len(slots))


def _assembly(g, v, which, margin=0):
    """Block stack of splitting halves over the boundary slots.

    ``which`` is "in" (sharp on outgoing, flat on incoming) or "out"
    (the blockwise complement).  With a margin the per-edge canonical
    padded companions are stacked instead, for feeding a twist chain.
    """
    slots = boundary_slots(g, v)
    if not slots:
        return Subspace.zero(0)
    per = 2 * (g.half_width + margin) + 1
    cols = []
    total = per * len(slots)
    for c, (eid, role) in enumerate(slots):
        sp = g.edges[eid].space
        take_sharp = (role == "out") == (which == "in")
        if margin == 0:
            frame = (sp.splitting.sharp if take_sharp else sp.splitting.flat).frame
        else:
            padded = sp.sharp_padded(margin) if take_sharp else sp.flat_padded(margin)
            frame = padded.padded.frame
        block = np.zeros((total, frame.shape[1]), dtype=np.complex128)
        block[c * per:(c + 1) * per, :] = frame
        cols.append(block)
    return Subspace(np.hstack(cols))


def incoming_assembly(g, v):
    return _assembly(g, v, "in")


def outgoing_assembly(g, v):
    return _assembly(g, v, "out")


def _realized_member(g, v, extra_factors=()):
    """Window intersection of (extra twists after the vertex recipe)
    applied to the padded incoming assembly."""
    recipe = g.vertex_data[v]
    chain = TwistChain(factors=recipe.factors + tuple(extra_factors))
    window = _vertex_window(g, v)
    if window is None:
        return Subspace.zero(0)
    if chain.margin == 0 and not chain.factors:
        return incoming_assembly(g, v)
    op = chain.realize(window)
    return op.apply_within_window(_assembly(g, v, "in", margin=chain.margin))


def vertex_subspace(g, v):
    """The boundary-value subspace of a vertex, materializing a recipe."""
    if v not in g.vertex_data:
        raise InvalidInput(f"vertex {v!r} has no boundary data")
    data = g.vertex_data[v]
    if isinstance(data, Subspace):
        return data
    return _realized_member(g, v)


def vertex_index(g, v):
    """Pair index of the vertex data against the outgoing assembly."""
    if v not in g.vertex_data:
        raise InvalidInput(f"vertex {v!r} has no boundary data")
    return pair_index(vertex_subspace(g, v), outgoing_assembly(g, v)).index


def edge_index(g, e):
    """Twist index of the edge symbol with the edge's own splitting."""
    t = g.edges[e].twist
    return 0 if t is None else tilde_ind(t)


def global_index_additive(g):
    """Sum of all vertex and edge indices.

    Handles self-loops; note that for a twisted self-loop the window
    truncation of the gluing recurrence can make this sum differ from
    the self-gluing pair index, which is the oracle-pinned one.
    """
    return (sum(vertex_index(g, v) for v in g.vertices)
            + sum(edge_index(g, e) for e in g.edges))


def _embedded_scalar_symbol(sym, channel, n_channels):
    """Diagonal multichannel symbol acting as ``sym`` on one channel."""
    from .circles import LaurentSymbol
    lo = min(sym.d_min, 0)
    hi = max(sym.d_max, 0)
    coeffs = np.zeros((hi - lo + 1, n_channels, n_channels), dtype=np.complex128)
    for c in range(n_channels):
        if c != channel:
            coeffs[-lo, c, c] = 1.0
    coeffs[sym.d_min - lo: sym.d_max - lo + 1, channel, channel] = \
        sym.coeffs[:, 0, 0]
    return LaurentSymbol(coeffs=coeffs, d_min=lo)


def _big_rows(g, v):
    """Row indices of the vertex boundary slots inside the edge direct sum."""
    order = sorted(g.edges)
    per = 2 * g.half_width + 1
    offset = {eid: i * per for i, eid in enumerate(order)}
    rows = []
    for eid, _ in boundary_slots(g, v):
        rows.extend(range(offset[eid], offset[eid] + per))
    return np.asarray(rows, dtype=int)


def _embed(frame, rows, total):
    out = np.zeros((total, frame.shape[1]), dtype=np.complex128)
    out[rows, :] = frame
    return Subspace(out)


def global_index_fan(g):
    """Fan index over the edge direct sum: parts are the incoming
    assemblies, members the vertex data with edge twists composed onto
    their target blocks.

    Twisted members need recipe vertex data; a twist composed after the
    crop would clip the boundary modes that carry its winding.
    """
    for eid, e in g.edges.items():
        if e.source == e.target:
            raise SelfLoopUnsupported(
                f"edge {eid!r} starts and ends at one vertex;"
                " use global_index_selfglue")
    if not g.edges:
        return 0
    order = sorted(g.edges)
    per = 2 * g.half_width + 1
    total = per * len(order)
    labels = tuple((eid, int(n)) for eid in order
                   for n in range(-g.half_width, g.half_width + 1))
    parts, members = [], []
    for v in g.vertices:
        slots = boundary_slots(g, v)
        rows = _big_rows(g, v)
        parts.append(_embed(incoming_assembly(g, v).frame, rows, total))
        twisted = [(c, g.edges[eid].twist) for c, (eid, role) in enumerate(slots)
                   if role == "in" and g.edges[eid].twist is not None]
        if not twisted:
            members.append(_embed(vertex_subspace(g, v).frame, rows, total))
            continue
        if not isinstance(g.vertex_data[v], TwistChain):
            raise InvalidInput(
                f"vertex {v!r} has twisted incoming edges but no recipe data;"
                " the fan route cannot compose a twist onto a cropped subspace")
        extras = []
        for c, t in twisted:
            if t.symbol is None:
                raise InvalidInput("edge twist carries no symbol")
            extras.append(("sym", _embedded_scalar_symbol(t.symbol, c, len(slots))))
        members.append(_embed(_realized_member(g, v, extras).frame, rows, total))
    f = Fan(ambient=plain_ambient_space(total, labels=labels),
            parts=tuple(parts), members=tuple(members))
    return fan_index(f).formula1


def global_index_selfglue(l, phi):
    """Pair index of an endo-correspondence against the graph of a twist.

    This is the one-vertex one-loop model: the correspondence holds the
    boundary values on both copies of the circle, the twist graph the
    gluing condition.
    """
    if not l.is_endo:
        raise DimensionMismatch("self-gluing needs an endo-correspondence")
    gr = twist_graph(phi)
    if gr.subspace.ambient_dim != l.subspace.ambient_dim:
        raise DimensionMismatch("twist does not act on the gluing circle")
    report = pair_index(l.subspace, gr.subspace)
    small = min(l.subspace.dim, gr.subspace.dim)
    if small > 0 and report.dim_intersection == small:
        warnings.warn("self-gluing pair is degenerate: one subspace contains "
                      "the other", RuntimeWarning, stacklevel=2)
    return report.index


def has_self_loops(g):
    return any(e.source == e.target for e in g.edges.values())


def sphere_path_graph(half_width, twist=None, radii=(2.0, 1.0)):
    """Disk--annulus--disk path; an optional transmission symbol rides on
    the edge into the outgoing disk, whose recipe data can absorb it."""
    from .circles import annulus_correspondence, symbol_twist, twist_circle
    from .circles import LaurentSymbol
    r1, r2 = radii
    outer = twist_circle(half_width, r1)
    inner = twist_circle(half_width, r2)
    tw = None if twist is None else symbol_twist(twist, inner)
    edges = {
        "e1": GraphEdge("in", "mid", outer.space()),
        "e2": GraphEdge("mid", "out", inner.space(), twist=tw),
    }
    ann = annulus_correspondence(outer, inner).subspace
    d = ann.ambient_dim // 2
    # mid slots are (e2, out) then (e1, in): swap the correspondence halves
    mid = Subspace(np.vstack([ann.frame[d:], ann.frame[:d]]))
    data = {
        "in": TwistChain(factors=()),
        "mid": mid,
        "out": TwistChain(factors=(("sym", LaurentSymbol.monomial(1)),)),
    }
    return DecompositionGraph(vertices=("in", "mid", "out"),
                              edges=edges, vertex_data=data)


def torus_graph(q, k, half_width):
    """One annulus vertex self-glued along one circle, weight q, twist z^k."""
    from .circles import LaurentSymbol, symbol_twist, twist_circle, weighted_diagonal
    if not (0.0 < q < 1.0):
        raise InvalidInput("weight q must lie strictly between 0 and 1")
    circle = twist_circle(half_width)
    tw = symbol_twist(LaurentSymbol.monomial(k), circle) if k else None
    edges = {"e": GraphEdge("v", "v", circle.space(), twist=tw)}
    data = {"v": weighted_diagonal(circle, q).subspace}
    return DecompositionGraph(vertices=("v",), edges=edges, vertex_data=data)


def _rotation_factor(rng, window, band):
    """Unitary rotation of two window coordinates with modes inside the
    interior band, as an interior chain factor."""
    labels = window.mode_labels()
    pool = np.flatnonzero(np.abs(labels) <= band)
    i, j = rng.choice(pool, size=2, replace=False)
    theta = rng.uniform(0.3, 1.2)
    phase = np.exp(2j * np.pi * rng.uniform())
    m = np.eye(window.dim, dtype=np.complex128)
    m[i, i] = m[j, j] = np.cos(theta)
    m[i, j] = -np.conj(phase) * np.sin(theta)
    m[j, i] = phase * np.sin(theta)
    return ("interior", m)


def _shift_factor(rng, window):
    from .circles import LaurentSymbol
    js = rng.integers(-1, 2, size=window.channels)
    if not np.any(js):
        return None
    lo, hi = int(js.min()), int(js.max())
    coeffs = np.zeros((hi - lo + 1, window.channels, window.channels),
                      dtype=np.complex128)
    for c, j in enumerate(js):
        coeffs[int(j) - lo, c, c] = 1.0
    return ("sym", LaurentSymbol(coeffs=coeffs, d_min=lo))


def random_graph(rng, n_vertices=None, n_edges=None, half_width=8,
                 twist_probability=0.6):
    """Self-loop-free synthetic graph with recipe vertex data.

    Vertex recipes are block mode shifts plus a couple of interior
    rotations applied to the incoming assembly; edge twists are
    monomials or random symbols of the exactly-windowable class.
    """
    from .circles import LaurentSymbol, random_laurent_symbol, symbol_twist, twist_circle
    if n_vertices is None:
        n_vertices = int(rng.integers(2, 5))
    if n_edges is None:
        n_edges = int(rng.integers(max(2, n_vertices - 1), 7))
    vertices = tuple(f"v{i}" for i in range(n_vertices))
    circle = twist_circle(half_width)
    edges = {}
    for i in range(n_edges):
        if i < n_vertices - 1:
            s, t = i, i + 1  # spine keeps every vertex incident
        else:
            s, t = rng.choice(n_vertices, size=2, replace=False)
        if rng.random() < twist_probability:
            if rng.random() < 0.5:
                sym = LaurentSymbol.monomial(int(rng.choice([-2, -1, 1, 2])))
            else:
                sym = random_laurent_symbol(rng, channels=1,
                                            degree=int(rng.integers(1, 3)))
            tw = symbol_twist(sym, circle)
        else:
            tw = None
        edges[f"e{i}"] = GraphEdge(f"v{s}", f"v{t}", circle.space(), twist=tw)
    g_probe = DecompositionGraph(vertices=vertices, edges=edges,
                                 vertex_data={v: TwistChain(factors=())
                                              for v in vertices})
    data = {}
    for v in vertices:
        window = _vertex_window(g_probe, v)
        factors = []
        for _ in range(int(rng.integers(0, 3))):
            factors.append(_rotation_factor(rng, window, half_width - 4))
        shift = _shift_factor(rng, window)
        if shift is not None:
            factors.append(shift)
        data[v] = TwistChain(factors=tuple(factors))
    return DecompositionGraph(vertices=vertices, edges=edges, vertex_data=data)


def materialize(g):
    """The same graph with every vertex recipe replaced by its subspace."""
    data = {v: vertex_subspace(g, v) for v in g.vertices}
    return DecompositionGraph(vertices=g.vertices, edges=dict(g.edges),
                              vertex_data=data)


def _permute_vertex_frame(frame, old_slots, new_slots, slot_map, per):
    """Reindex a boundary subspace frame from one slot order to another.

    ``slot_map`` sends an old slot to its new identity (edge renames and
    role flips); unlisted slots carry over unchanged.
    """
    renamed = [slot_map.get(s, s) for s in old_slots]
    out = np.zeros((per * len(new_slots), frame.shape[1]), dtype=np.complex128)
    for new_pos, slot in enumerate(new_slots):
        old_pos = renamed.index(slot)
        out[new_pos * per:(new_pos + 1) * per, :] = \
            frame[old_pos * per:(old_pos + 1) * per, :]
    return Subspace(out)


def _permute_recipe(chain, perm, per):
    """Conjugate every chain factor by a channel permutation so the recipe
    realizes the block-permuted member over the reordered assembly."""
    n = len(perm)
    p = np.zeros((n * per, n * per))
    for c, old in enumerate(perm):
        p[c * per:(c + 1) * per, old * per:(old + 1) * per] = np.eye(per)
    factors = []
    for kind, payload in chain.factors:
        if kind == "interior":
            factors.append((kind, p @ payload @ p.T))
        else:
            coeffs = payload.coeffs[:, perm, :][:, :, perm]
            factors.append((kind, type(payload)(coeffs=coeffs,
                                                d_min=payload.d_min)))
    return TwistChain(factors=tuple(factors))


def _carry_data(g, new_graph_edges, new_vertices, slot_map):
    """Vertex data for a structurally edited graph: vertices whose block
    positions survive keep their data; the rest are permuted, recipes by
    factor conjugation and plain subspaces by row blocks."""
    per = 2 * g.half_width + 1
    probe = DecompositionGraph(
        vertices=new_vertices, edges=new_graph_edges,
        vertex_data={v: TwistChain(factors=()) for v in new_vertices})
    data = {}
    for v in g.vertices:
        old_slots = boundary_slots(g, v)
        new_slots = boundary_slots(probe, v)
        renamed = tuple(slot_map.get(s, s) for s in old_slots)
        if renamed == new_slots:
            data[v] = g.vertex_data[v]
        elif isinstance(g.vertex_data[v], TwistChain):
            perm = [renamed.index(s) for s in new_slots]
            data[v] = _permute_recipe(g.vertex_data[v], perm, per)
        else:
            frame = vertex_subspace(g, v).frame
            data[v] = _permute_vertex_frame(frame, old_slots, new_slots,
                                            slot_map, per)
    return data


def subdivide_edge(g, eid, new_vertex, new_ids=None):
    """Split an edge in two across a fresh identity-annulus vertex.

    The twist of the original edge moves to the second half (the one
    keeping the original target), so the fan route can still compose it
    onto recipe data; the new vertex carries the plain diagonal.
    """
    if eid not in g.edges:
        raise InvalidInput(f"no edge {eid!r}")
    if new_vertex in g.vertices:
        raise InvalidInput(f"vertex {new_vertex!r} already exists")
    e = g.edges[eid]
    ida, idb = new_ids if new_ids is not None else (f"{eid}a", f"{eid}b")
    edges = {k: v for k, v in g.edges.items() if k != eid}
    edges[ida] = GraphEdge(e.source, new_vertex, e.space)
    edges[idb] = GraphEdge(new_vertex, e.target, e.space, twist=e.twist)
    vertices = g.vertices + (new_vertex,)
    slot_map = {(eid, "out"): (ida, "out"), (eid, "in"): (idb, "in")}
    data = _carry_data(g, edges, vertices, slot_map)
    per = 2 * g.half_width + 1
    diag = np.zeros((2 * per, per), dtype=np.complex128)
    root = 1.0 / np.sqrt(2.0)
    for i in range(per):
        diag[i, i] = root
        diag[per + i, i] = root
    data[new_vertex] = Subspace(diag)
    return DecompositionGraph(vertices=vertices, edges=edges, vertex_data=data)


def _flipped_space(space):
    from .spaces import SHARP_NEGATIVE, SHARP_NONNEG, ModelSpace, Splitting
    swapped = Splitting(sharp=space.splitting.flat, flat=space.splitting.sharp)
    convention = SHARP_NEGATIVE if space.convention == SHARP_NONNEG \
        else SHARP_NONNEG
    return ModelSpace(dim=space.dim, basis_labels=space.basis_labels,
                      splitting=swapped,
                      algebra_generators=space.algebra_generators,
                      window=space.window, convention=convention)


def flip_edge(g, eid):
    """Reverse one edge: swap endpoints, swap the splitting roles (the
    co-orientation flips with the edge), and invert the twist.

    Every assembled subspace is then literally unchanged, so the total
    index is invariant; the twist must have a Laurent-polynomial
    inverse (monomials and unimodular matrix symbols do).
    """
    from .circles import multiplication_operator, symbol_inverse
    from .morphisms import Twist
    if eid not in g.edges:
        raise InvalidInput(f"no edge {eid!r}")
    e = g.edges[eid]
    space = _flipped_space(e.space)
    tw = None
    if e.twist is not None:
        if e.twist.symbol is None:
            raise InvalidInput("cannot invert a twist without a symbol")
        inv = symbol_inverse(e.twist.symbol)
        op = multiplication_operator(inv, space.window)
        tw = Twist(base=space, operator=op, symbol=inv, budget=None)
    edges = dict(g.edges)
    edges[eid] = GraphEdge(e.target, e.source, space, twist=tw)
    slot_map = {(eid, "out"): (eid, "in"), (eid, "in"): (eid, "out")}
    data = _carry_data(g, edges, g.vertices, slot_map)
    return DecompositionGraph(vertices=g.vertices, edges=edges,
                              vertex_data=data)


def perturb_edge_splittings(g, rank, seed, support_gap=3):
    """Replace every edge splitting by a random one in its polarization
    class, rebasing twists and keeping the vertex subspaces themselves.

    Data is materialized first: recipes regenerate against the new
    assemblies and would describe a different geometry.
    """
    from .spaces import perturb_splitting
    frozen = materialize(g)
    half = g.half_width
    edges = {}
    for i, (eid, e) in enumerate(sorted(frozen.edges.items())):
        labels = e.space.window.mode_labels()
        support = [int(j) for j in np.flatnonzero(np.abs(labels) <= half - support_gap)]
        s = perturb_splitting(e.space.splitting, rank, seed + i, support=support)
        space = e.space.with_splitting(s)
        tw = None if e.twist is None else e.twist.with_base_splitting(s)
        edges[eid] = GraphEdge(e.source, e.target, space, twist=tw)
    return DecompositionGraph(vertices=frozen.vertices, edges=edges,
                              vertex_data=dict(frozen.vertex_data))


def _twist_label(twist):
    if twist is None:
        return "1"
    sym = twist.symbol
    if sym is None:
        return "op"
    if sym.coeffs.shape == (1, 1, 1):
        c = sym.coeffs[0, 0, 0]
        coef = "" if abs(c - 1.0) < 1e-12 else \
            (f"{c.real:.3g}" if abs(c.imag) < 1e-12 else f"({c:.3g})")
        power = "" if sym.d_min == 0 else f"z^{sym.d_min}"
        return (coef + (" " if coef and power else "") + power) or "1"
    return f"sym[{sym.d_min}..{sym.d_max}]"


def to_dot(g):
    """Deterministic DOT rendering with vertex indices and twist labels."""
    lines = ["digraph decomposition {"]
    for v in sorted(g.vertices, key=str):
        lines.append(f'  "{v}" [label="{v} (ind {vertex_index(g, v)})"];')
    for eid in sorted(g.edges, key=str):
        e = g.edges[eid]
        lines.append(f'  "{e.source}" -> "{e.target}" '
                     f'[label="{eid}: {_twist_label(e.twist)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
