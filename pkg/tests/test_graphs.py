import math
import random

import pytest

from quasigraph.graphs import (
    GeneratorSpec,
    VertexSet,
    build_graph,
    edge_density,
    edges_between,
    edges_within,
    generate,
    planted_set,
    read_graph,
    write_graph,
)

from oracles import naive_edges_between, naive_edges_within, random_graph, random_vertex_set


def path3():
    return build_graph(3, [(0, 1), (1, 2)])


class TestBuild:
    def test_basic(self):
        g = build_graph(4, [(0, 1), (2, 3)])
        assert g.n == 4 and g.edge_count == 2
        assert g.has_edge(1, 0) and g.has_edge(2, 3) and not g.has_edge(0, 2)
        assert g.degree_sequence() == (1, 1, 1, 1)

    def test_rejects_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            build_graph(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            build_graph(3, [(0, 3)])

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError, match="duplicate"):
            build_graph(3, [(0, 1), (1, 0)])

    def test_vertex_cap(self):
        with pytest.raises(ValueError, match="cap"):
            build_graph(5000, [])
        # opt-in larger cap
        g = build_graph(5000, [], max_vertices=6000)
        assert g.n == 5000


class TestCounts:
    def test_edges_between_path(self):
        # path 0-1-2, A={0,1}, B={1,2}: ordered pairs (0,1) and (1,2)
        g = path3()
        assert edges_between(g, VertexSet([0, 1]), VertexSet([1, 2])) == 2

    def test_between_equals_double_within(self):
        rng = random.Random(11)
        for _ in range(200):
            g = random_graph(rng, rng.randrange(1, 11))
            s = random_vertex_set(rng, g.n)
            assert edges_between(g, s, s) == 2 * edges_within(g, s)

    def test_against_naive(self):
        rng = random.Random(7)
        for _ in range(200):
            g = random_graph(rng, rng.randrange(1, 11))
            a = random_vertex_set(rng, g.n)
            b = random_vertex_set(rng, g.n)
            assert edges_within(g, a) == naive_edges_within(g, a)
            assert edges_between(g, a, b) == naive_edges_between(g, a, b)

    def test_four_term_identity(self):
        # e(A,B) = e(A|B) + e(A&B) - e(A\B) - e(B\A), within-counts unordered
        rng = random.Random(23)
        for _ in range(300):
            g = random_graph(rng, rng.randrange(1, 12))
            a = random_vertex_set(rng, g.n)
            b = random_vertex_set(rng, g.n)
            lhs = edges_between(g, a, b)
            w = lambda m: edges_within(g, VertexSet.from_mask(m))
            rhs = (
                w(a.mask | b.mask)
                + w(a.mask & b.mask)
                - w(a.mask & ~b.mask)
                - w(b.mask & ~a.mask)
            )
            assert lhs == rhs

    def test_density(self):
        g = build_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
        assert edge_density(g) == pytest.approx(0.5)
        with pytest.raises(ValueError, match="n=1"):
            edge_density(build_graph(1, []))

    def test_set_out_of_range(self):
        g = path3()
        with pytest.raises(ValueError, match="not contained"):
            edges_within(g, VertexSet([5]))


class TestGenerate:
    def test_complete_and_empty(self):
        k5 = generate(GeneratorSpec(kind="complete", n=5))
        assert k5.edge_count == 10
        e5 = generate(GeneratorSpec(kind="empty", n=5))
        assert e5.edge_count == 0

    def test_deterministic(self):
        spec = GeneratorSpec(kind="erdos_renyi", n=40, p=0.3, seed=5)
        g1, g2 = generate(spec), generate(spec)
        assert g1.adj == g2.adj
        g3 = generate(GeneratorSpec(kind="erdos_renyi", n=40, p=0.3, seed=6))
        assert g1.adj != g3.adj

    def test_edge_count_concentrates(self):
        # 4 sigma band around the binomial mean for the spec instance
        g = generate(GeneratorSpec(kind="erdos_renyi", n=100, p=0.5, seed=7))
        pairs = 100 * 99 // 2
        mean = pairs * 0.5
        sigma = math.sqrt(pairs * 0.25)
        assert abs(g.edge_count - mean) <= 4 * sigma

    def test_planted_dense(self):
        spec = GeneratorSpec(
            kind="planted_dense", n=60, p=0.2, plant_fraction=0.5, plant_boost=0.6, seed=3
        )
        g = generate(spec)
        plant = planted_set(spec)
        assert plant.size == 30
        inside = edges_within(g, plant)
        pairs = 30 * 29 // 2
        # boosted to 0.8 inside the plant; 5 sigma band
        assert abs(inside - 0.8 * pairs) <= 5 * math.sqrt(pairs * 0.8 * 0.2)
        rest = VertexSet.from_mask(g.full_mask & ~plant.mask)
        outside = edges_within(g, rest)
        assert abs(outside - 0.2 * pairs) <= 5 * math.sqrt(pairs * 0.2 * 0.8)

    def test_bad_parameters(self):
        with pytest.raises(ValueError, match="outside"):
            generate(GeneratorSpec(kind="erdos_renyi", n=5, p=1.5))
        with pytest.raises(ValueError, match="p \\+ plant_boost"):
            generate(
                GeneratorSpec(kind="planted_dense", n=5, p=0.8, plant_boost=0.5)
            )
        with pytest.raises(ValueError, match="unknown generator kind"):
            GeneratorSpec(kind="grid", n=5)

    def test_file_kind_requires_path(self):
        with pytest.raises(ValueError, match="requires a path"):
            generate(GeneratorSpec(kind="file"))


class TestFileFormat:
    def test_round_trip(self, tmp_path):
        rng = random.Random(19)
        for i in range(20):
            g = random_graph(rng, rng.randrange(0, 12))
            path = str(tmp_path / f"g{i}.txt")
            write_graph(g, path)
            back = read_graph(path)
            assert back.adj == g.adj and back.edge_count == g.edge_count

    def test_sorted_output_and_comments(self, tmp_path):
        g = build_graph(4, [(2, 3), (0, 1), (0, 3)])
        path = str(tmp_path / "g.txt")
        write_graph(g, path)
        body = open(path).read().splitlines()
        assert body[0] == "4 3"
        assert body[1:] == ["0 1", "0 3", "2 3"]
        with_comments = tmp_path / "c.txt"
        with_comments.write_text("# a graph\n4 3  # header\n0 1\n0 3\n\n2 3\n")
        back = read_graph(str(with_comments))
        assert back.adj == g.adj

    def test_reader_errors_carry_line_numbers(self, tmp_path):
        cases = [
            ("3 1\n1 1\n", "2: self-loop"),
            ("3 1\n0 5\n", "2: vertex 5 out of range"),
            ("3 1\n2 1\n", "2: edge must satisfy u < v"),
            ("3 1\nx y\n", "2: expected two integers"),
            ("3 2\n0 1\n", "declares 2 edges, found 1"),
            ("", "missing 'n m' header"),
        ]
        for i, (content, msg) in enumerate(cases):
            path = tmp_path / f"bad{i}.txt"
            path.write_text(content)
            with pytest.raises(ValueError, match=msg):
                read_graph(str(path))


class TestVertexSet:
    def test_members_round_trip(self):
        s = VertexSet([5, 1, 3])
        assert s.members == (1, 3, 5)
        assert len(s) == 3 and 3 in s and 2 not in s
        assert VertexSet.from_mask(s.mask) == s

    def test_negative_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            VertexSet([-1])
