import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metasolve import formats
from metasolve.formats import (
    CnfFormula,
    HeaderMismatch,
    ParseError,
    TspInstance,
    UnsupportedEdgeWeightType,
    VrpInstance,
    distance,
    nint,
    parse_dimacs,
    parse_dimacs_edges,
    parse_qubo_text,
    parse_tsplib,
    write_dimacs,
    write_qubo_text,
    write_tsplib,
)

TRIANGLE_345 = """NAME : tri
TYPE : TSP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 0 3
3 4 0
EOF
"""

SMALL_CVRP = """NAME : toy-n4-k2
COMMENT : hand built
TYPE : CVRP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 0 5
3 5 0
4 5 5
DEMAND_SECTION
1 0
2 4
3 6
4 10
DEPOT_SECTION
1
-1
EOF
"""


class TestParseTsplib:
    def test_triangle_is_tsp(self):
        inst = parse_tsplib(TRIANGLE_345)
        assert isinstance(inst, TspInstance) and not isinstance(inst, VrpInstance)
        assert inst.n == 3
        assert distance(inst, 0, 1) == 3
        assert distance(inst, 0, 2) == 4
        assert distance(inst, 1, 2) == 5

    def test_cvrp_sections_produce_vrp(self):
        inst = parse_tsplib(SMALL_CVRP)
        assert isinstance(inst, VrpInstance)
        assert inst.capacity == 10
        assert inst.demands == [0, 4, 6, 10]
        assert inst.depot_index == 0
        assert inst.vehicles == 2  # k2 token in the name

    def test_p_n16_k8_header_convention(self, bundled_instance_dir):
        text = (bundled_instance_dir / "P-n16-k8.vrp").read_text()
        inst = parse_tsplib(text)
        assert isinstance(inst, VrpInstance)
        assert inst.n == 16
        assert inst.vehicles == 8
        assert inst.capacity == 35

    def test_vehicle_fallback_is_demand_ceiling(self):
        text = SMALL_CVRP.replace("toy-n4-k2", "toy").replace("COMMENT : hand built\n", "")
        inst = parse_tsplib(text)
        assert inst.vehicles == math.ceil(20 / 10)

    def test_missing_dimension(self):
        bad = "NAME : x\nTYPE : TSP\nEDGE_WEIGHT_TYPE : EUC_2D\nEOF\n"
        with pytest.raises(ParseError):
            parse_tsplib(bad)

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse_tsplib("")

    def test_geo_rejected(self):
        bad = TRIANGLE_345.replace("EUC_2D", "GEO")
        with pytest.raises(UnsupportedEdgeWeightType):
            parse_tsplib(bad)

    def test_explicit_matrix(self):
        text = (
            "NAME : m\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EXPLICIT\n"
            "EDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n"
            "0 3 4\n3 0 5\n4 5 0\nEOF\n"
        )
        inst = parse_tsplib(text)
        assert inst.edge_weight_kind == "explicit"
        assert distance(inst, 2, 1) == 5


class TestWriteTsplib:
    def test_roundtrip_triangle(self):
        inst = parse_tsplib(TRIANGLE_345)
        again = parse_tsplib(write_tsplib(inst))
        assert again == inst

    def test_roundtrip_cvrp(self):
        inst = parse_tsplib(SMALL_CVRP)
        again = parse_tsplib(write_tsplib(inst))
        assert again == inst
        assert again.demands == inst.demands
        assert again.capacity == inst.capacity

    def test_roundtrip_explicit_matrix(self):
        inst = TspInstance(
            name="m", n=3, edge_weight_kind="explicit",
            matrix=[[0, 7, 2], [7, 0, 4], [2, 4, 0]],
        )
        text = write_tsplib(inst)
        assert "EDGE_WEIGHT_SECTION" in text
        assert parse_tsplib(text) == inst

    def test_roundtrip_bundled(self, bundled_instance_dir):
        for path in bundled_instance_dir.glob("*.vrp"):
            inst = parse_tsplib(path.read_text())
            assert parse_tsplib(write_tsplib(inst)) == inst


class TestDistance:
    def test_vertical_pair(self):
        inst = parse_tsplib(TRIANGLE_345)
        assert distance(inst, 0, 1) == 3

    def test_nint_rounds_to_nearest(self):
        inst = TspInstance(name="d", n=3, edge_weight_kind="euc2d",
                           coords=[(0.0, 0.0), (1.0, 1.0), (9.0, 9.0)])
        assert distance(inst, 0, 1) == 1  # nint(1.414...) = 1
        assert nint(2.5) == 2 + 1  # ties round up

    def test_diagonal_zero(self):
        inst = parse_tsplib(TRIANGLE_345)
        assert distance(inst, 2, 2) == 0

    def test_out_of_range(self):
        inst = parse_tsplib(TRIANGLE_345)
        with pytest.raises(formats.IndexOutOfRange):
            distance(inst, 0, 3)

    @given(
        st.lists(
            st.tuples(st.integers(-500, 500), st.integers(-500, 500)),
            min_size=3, max_size=12, unique=True,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_symmetric_nonnegative_zero_diagonal(self, points):
        inst = TspInstance(
            name="rand", n=len(points), edge_weight_kind="euc2d",
            coords=[(float(x), float(y)) for x, y in points],
        )
        for i in range(inst.n):
            assert distance(inst, i, i) == 0
            for j in range(inst.n):
                d = distance(inst, i, j)
                assert d >= 0
                assert d == distance(inst, j, i)


class TestDimacs:
    def test_two_clause_formula(self):
        f = parse_dimacs("p cnf 2 2\n1 -2 0\n-1 2 0")
        assert f.num_vars == 2
        assert f.clauses == [[1, -2], [-1, 2]]

    def test_comments_ignored(self):
        f = parse_dimacs("c comment\np cnf 1 1\n1 0")
        assert f.num_vars == 1
        assert f.clauses == [[1]]

    def test_header_mismatch(self):
        with pytest.raises(HeaderMismatch):
            parse_dimacs("p cnf 1 2\n1 0")

    def test_clause_spanning_lines(self):
        f = parse_dimacs("p cnf 3 1\n1 2\n3 0")
        assert f.clauses == [[1, 2, 3]]

    def test_literal_out_of_range(self):
        with pytest.raises(ParseError):
            parse_dimacs("p cnf 1 1\n2 0")

    def test_roundtrip(self):
        f = CnfFormula(num_vars=3, clauses=[[1, -2], [3], [-1, -3]])
        assert parse_dimacs(write_dimacs(f)) == f


class TestDimacsEdges:
    def test_triangle(self):
        n, edges = parse_dimacs_edges("p edge 3 3\ne 1 2\ne 2 3\ne 1 3")
        assert n == 3
        assert edges == [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]

    def test_weighted(self):
        n, edges = parse_dimacs_edges("p edge 2 1\ne 1 2 5")
        assert edges == [(0, 1, 5.0)]

    def test_count_mismatch(self):
        with pytest.raises(HeaderMismatch):
            parse_dimacs_edges("p edge 2 2\ne 1 2")


class TestQuboText:
    def test_parse(self):
        n, coeffs, offset = parse_qubo_text("qubo 2\n0 0 -1\n0 1 2\n1 1 -1\n")
        assert n == 2
        assert coeffs == {(0, 0): -1.0, (0, 1): 2.0, (1, 1): -1.0}
        assert offset == 0.0

    def test_bad_order_rejected(self):
        with pytest.raises(ParseError):
            parse_qubo_text("qubo 2\n1 0 3\n")

    def test_roundtrip(self):
        coeffs = {(0, 0): -1.5, (0, 2): 2.0, (1, 1): 0.5}
        text = write_qubo_text(3, coeffs, offset=0.25)
        assert parse_qubo_text(text) == (3, coeffs, 0.25)


def test_write_routes_format():
    text = formats.write_routes([[3, 1], [2]], 42)
    assert text.splitlines() == ["route 0: 0 3 1 0", "route 1: 0 2 0", "cost: 42"]
