"""Graph decompositions: assemblies, both global index routes, self-gluing,
and the structural edits that must not move the total."""

import numpy as np
import pytest

from fredcorr.circles import (
    LaurentSymbol,
    build_torus,
    symbol_twist,
    twist_circle,
    winding_number,
)
from fredcorr.errors import DimensionMismatch, InvalidInput, SelfLoopUnsupported
from fredcorr.fans import TwistChain
from fredcorr.graphs import (
    DecompositionGraph,
    GraphEdge,
    boundary_slots,
    edge_index,
    flip_edge,
    global_index_additive,
    global_index_fan,
    global_index_selfglue,
    has_self_loops,
    incoming_assembly,
    materialize,
    outgoing_assembly,
    perturb_edge_splittings,
    random_graph,
    sphere_path_graph,
    subdivide_edge,
    to_dot,
    torus_graph,
    vertex_index,
    vertex_subspace,
)
from fredcorr.subspaces import Subspace, subspaces_equal


class TestSpherePath:
    def test_untwisted_total_is_one_both_routes(self):
        g = sphere_path_graph(8)
        assert global_index_additive(g) == 1
        assert global_index_fan(g) == 1

    def test_vertex_indices(self):
        g = sphere_path_graph(8)
        assert vertex_index(g, "in") == 0
        assert vertex_index(g, "mid") == 0
        assert vertex_index(g, "out") == 1

    @pytest.mark.parametrize("k", [-2, -1, 0, 1, 2, 3])
    def test_twist_adds_winding(self, k):
        tw = None if k == 0 else LaurentSymbol.monomial(k)
        g = sphere_path_graph(8, twist=tw)
        assert global_index_additive(g) == 1 + k
        assert global_index_fan(g) == 1 + k

    def test_assemblies_fill_ambient(self):
        g = sphere_path_graph(6)
        for v in g.vertices:
            inc = incoming_assembly(g, v)
            out = outgoing_assembly(g, v)
            assert inc.dim + out.dim == inc.ambient_dim

    def test_radii_do_not_matter(self):
        for radii in [(2.0, 1.2), (1.5, 1.0), (3.0, 2.1)]:
            g = sphere_path_graph(8, radii=radii)
            assert global_index_additive(g) == 1


class TestTorus:
    @pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
    def test_untwisted_total_zero(self, q):
        g = torus_graph(q, 0, 8)
        assert has_self_loops(g)
        assert global_index_additive(g) == 0

    def test_fan_route_refuses_self_loops(self):
        g = torus_graph(0.5, 1, 8)
        with pytest.raises(SelfLoopUnsupported):
            global_index_fan(g)

    @pytest.mark.parametrize("k", [-3, -1, 0, 2, 3])
    @pytest.mark.parametrize("q", [0.3, 0.9])
    def test_selfglue_matches_direct_model(self, q, k):
        l, phi = build_torus(q, k, 8)
        assert global_index_selfglue(l, phi) == (0 if k == 0 else -abs(k))

    def test_degenerate_gluing_warns(self):
        from fredcorr.morphisms import graph_correspondence, twist_graph
        from fredcorr.circles import multiplication_operator
        circle = twist_circle(6)
        op = multiplication_operator(LaurentSymbol.identity(1), circle.window)
        from fredcorr.morphisms import Twist
        phi = Twist(base=circle.space(), operator=op,
                    symbol=LaurentSymbol.identity(1))
        l = twist_graph(phi)
        with pytest.warns(RuntimeWarning, match="degenerate"):
            assert global_index_selfglue(l, phi) == 0

    def test_mismatched_twist_base_raises(self):
        l, _ = build_torus(0.5, 1, 8)
        _, phi_small = build_torus(0.5, 1, 6)
        with pytest.raises(DimensionMismatch):
            global_index_selfglue(l, phi_small)


class TestRandomGraphs:
    def test_fan_equals_additive(self):
        for seed in range(20):
            rng = np.random.default_rng(7000 + seed)
            g = random_graph(rng)
            assert not has_self_loops(g)
            assert global_index_fan(g) == global_index_additive(g), seed

    def test_every_vertex_has_incident_edge(self):
        rng = np.random.default_rng(3)
        g = random_graph(rng)
        for v in g.vertices:
            assert boundary_slots(g, v)

    def test_edge_index_is_symbol_winding(self):
        rng = np.random.default_rng(11)
        g = random_graph(rng)
        for eid, e in g.edges.items():
            if e.twist is not None:
                assert edge_index(g, eid) == winding_number(e.twist.symbol)
            else:
                assert edge_index(g, eid) == 0


class TestSplittingInvariance:
    def test_total_fixed_summands_move(self):
        moved = 0
        for seed in range(20):
            rng = np.random.default_rng(4000 + seed)
            g = random_graph(rng)
            before_total = global_index_additive(g)
            before = [vertex_index(g, v) for v in g.vertices]
            before += [edge_index(g, e) for e in sorted(g.edges)]
            p = perturb_edge_splittings(g, rank=2, seed=seed)
            after = [vertex_index(p, v) for v in p.vertices]
            after += [edge_index(p, e) for e in sorted(p.edges)]
            assert global_index_additive(p) == before_total, seed
            if after != before:
                moved += 1
        assert moved >= 10


class TestSubdivision:
    @pytest.mark.parametrize("k", [0, 2, -1])
    def test_sphere_path_invariant(self, k):
        tw = None if k == 0 else LaurentSymbol.monomial(k)
        g = sphere_path_graph(8, twist=tw)
        h = subdivide_edge(g, "e1", "mid2")
        assert set(h.edges) == {"e1a", "e1b", "e2"}
        assert global_index_additive(h) == 1 + k
        assert global_index_fan(h) == 1 + k

    def test_twist_moves_to_second_half(self):
        g = sphere_path_graph(8, twist=LaurentSymbol.monomial(1))
        h = subdivide_edge(g, "e2", "u")
        assert h.edges["e2a"].twist is None
        assert h.edges["e2b"].twist is not None
        assert vertex_index(h, "u") == 0
        assert global_index_additive(h) == 2
        assert global_index_fan(h) == 2

    def test_random_graph_invariant(self):
        for seed in (0, 13):
            rng = np.random.default_rng(1000 + seed)
            g = random_graph(rng)
            eid = sorted(g.edges)[0]
            h = subdivide_edge(g, eid, "u")
            assert global_index_additive(h) == global_index_additive(g)
            assert global_index_fan(h) == global_index_fan(g)

    def test_bad_arguments(self):
        g = sphere_path_graph(6)
        with pytest.raises(InvalidInput):
            subdivide_edge(g, "nope", "u")
        with pytest.raises(InvalidInput):
            subdivide_edge(g, "e1", "mid")


class TestOrientationFlip:
    def test_random_graph_invariant_both_routes(self):
        for seed in (0, 7, 13, 21):
            rng = np.random.default_rng(1000 + seed)
            g = random_graph(rng)
            eid = sorted(g.edges)[int(rng.integers(len(g.edges)))]
            f = flip_edge(g, eid)
            assert f.edges[eid].source == g.edges[eid].target
            assert f.edges[eid].target == g.edges[eid].source
            assert global_index_additive(f) == global_index_additive(g)
            assert global_index_fan(f) == global_index_fan(g)

    def test_vertex_indices_unchanged(self):
        # endpoints reorder their blocks, so subspaces match only up to
        # that permutation; every per-vertex index is on the nose
        rng = np.random.default_rng(1005)
        g = random_graph(rng)
        eid = sorted(g.edges)[0]
        f = flip_edge(g, eid)
        touched = {g.edges[eid].source, g.edges[eid].target}
        for v in g.vertices:
            assert vertex_index(f, v) == vertex_index(g, v)
            if v not in touched:
                assert subspaces_equal(vertex_subspace(g, v),
                                       vertex_subspace(f, v))

    def test_edge_contribution_invariant(self):
        g = sphere_path_graph(8, twist=LaurentSymbol.monomial(2))
        f = flip_edge(g, "e2")
        assert edge_index(g, "e2") == 2
        assert edge_index(f, "e2") == 2
        assert global_index_additive(f) == 3

    def test_double_flip_restores_totals(self):
        rng = np.random.default_rng(1021)
        g = random_graph(rng)
        eid = sorted(g.edges)[-1]
        ff = flip_edge(flip_edge(g, eid), eid)
        assert global_index_additive(ff) == global_index_additive(g)

    def test_symbolless_twist_refused(self):
        from fredcorr.morphisms import Twist
        circle = twist_circle(6)
        tw = symbol_twist(LaurentSymbol.monomial(1), circle)
        bare = Twist(base=tw.base, operator=tw.operator, symbol=None,
                     budget=tw.budget)
        edges = {"e": GraphEdge("a", "b", circle.space(), twist=bare)}
        data = {"a": TwistChain(factors=()), "b": TwistChain(factors=())}
        g = DecompositionGraph(vertices=("a", "b"), edges=edges,
                               vertex_data=data)
        with pytest.raises(InvalidInput):
            flip_edge(g, "e")


class TestValidation:
    def test_missing_vertex_data(self):
        circle = twist_circle(6)
        edges = {"e": GraphEdge("a", "b", circle.space())}
        with pytest.raises(InvalidInput):
            DecompositionGraph(vertices=("a", "b"), edges=edges,
                               vertex_data={"a": TwistChain(factors=())})

    def test_multichannel_edge_space_refused(self):
        from fredcorr.circles import LaurentCircle
        from fredcorr.spaces import SHARP_NONNEG
        wide = LaurentCircle(half_width=6, radius=1.0, channels=2,
                             convention=SHARP_NONNEG)
        edges = {"e": GraphEdge("a", "b", wide.space())}
        data = {"a": TwistChain(factors=()), "b": TwistChain(factors=())}
        with pytest.raises(InvalidInput, match="scalar"):
            DecompositionGraph(vertices=("a", "b"), edges=edges,
                               vertex_data=data)

    def test_wrong_ambient_subspace(self):
        circle = twist_circle(6)
        edges = {"e": GraphEdge("a", "b", circle.space())}
        data = {"a": Subspace(np.eye(5)), "b": TwistChain(factors=())}
        with pytest.raises(DimensionMismatch):
            DecompositionGraph(vertices=("a", "b"), edges=edges,
                               vertex_data=data)

    def test_endpoint_outside_graph(self):
        circle = twist_circle(6)
        edges = {"e": GraphEdge("a", "zzz", circle.space())}
        with pytest.raises(InvalidInput):
            DecompositionGraph(vertices=("a",), edges=edges,
                               vertex_data={"a": TwistChain(factors=())})

    def test_fan_needs_recipe_under_twist(self):
        circle = twist_circle(6)
        tw = symbol_twist(LaurentSymbol.monomial(1), circle)
        edges = {"e": GraphEdge("a", "b", circle.space(), twist=tw)}
        plain = outgoing_assembly  # build b's data as a plain subspace
        g0 = DecompositionGraph(
            vertices=("a", "b"), edges=edges,
            vertex_data={"a": TwistChain(factors=()),
                         "b": TwistChain(factors=())})
        data = {"a": TwistChain(factors=()),
                "b": incoming_assembly(g0, "b")}
        g = DecompositionGraph(vertices=("a", "b"), edges=edges,
                               vertex_data=data)
        with pytest.raises(InvalidInput, match="recipe"):
            global_index_fan(g)
        assert global_index_additive(g) == 1  # additive route still fine

    def test_mixed_window_widths_refused(self):
        edges = {
            "e1": GraphEdge("a", "b", twist_circle(6).space()),
            "e2": GraphEdge("b", "a", twist_circle(8).space()),
        }
        data = {"a": TwistChain(factors=()), "b": TwistChain(factors=())}
        with pytest.raises(InvalidInput):
            DecompositionGraph(vertices=("a", "b"), edges=edges,
                               vertex_data=data)


class TestMaterialize:
    def test_same_indices_no_recipes(self):
        rng = np.random.default_rng(1002)
        g = random_graph(rng)
        m = materialize(g)
        assert all(isinstance(d, Subspace) for d in m.vertex_data.values())
        assert global_index_additive(m) == global_index_additive(g)
        for v in g.vertices:
            assert subspaces_equal(vertex_subspace(m, v), vertex_subspace(g, v))


class TestDot:
    def test_deterministic(self):
        g = sphere_path_graph(6, twist=LaurentSymbol.monomial(2))
        assert to_dot(g) == to_dot(g)

    def test_contents(self):
        g = sphere_path_graph(6, twist=LaurentSymbol.monomial(2))
        dot = to_dot(g)
        assert dot.startswith("digraph")
        assert '"mid" -> "out" [label="e2: z^2"];' in dot
        assert '"out" [label="out (ind 1)"];' in dot

    def test_self_loop(self):
        dot = to_dot(torus_graph(0.5, -1, 6))
        assert '"v" -> "v" [label="e: z^-1"];' in dot


class TestWindowStability:
    @pytest.mark.parametrize("half", [8, 10, 12])
    def test_sphere_path(self, half):
        g = sphere_path_graph(half, twist=LaurentSymbol.monomial(2))
        assert global_index_additive(g) == 3
        assert global_index_fan(g) == 3

    @pytest.mark.parametrize("half", [8, 10, 12])
    def test_torus(self, half):
        l, phi = build_torus(0.5, 2, half)
        assert global_index_selfglue(l, phi) == -2
