import pytest

from metasolve import model
from metasolve.formats import ParseError
from metasolve.model import (
    FAILED,
    NEEDS_INPUT,
    READY,
    SOLVED,
    SOLVING,
    IllegalTransition,
    Infeasibility,
    ProblemNode,
    SolveResult,
    UnknownProblemType,
    clone_tree,
    create_problem,
    new_id,
    transition,
    tree_from_json,
    tree_to_json,
    validate_tree,
)

TSP_TEXT = """NAME : t
TYPE : TSP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 0 10
3 10 10
4 10 0
EOF
"""


class TestCreateProblem:
    def test_tsp_root_ready(self):
        node = create_problem("tsp", TSP_TEXT)
        assert node.type_id == "tsp"
        assert node.state == READY
        assert node.payload.n == 4
        assert node.children == []

    def test_vrp_from_bundled_file(self, bundled_instance_dir):
        text = (bundled_instance_dir / "P-n16-k8.vrp").read_text()
        node = create_problem("vrp", text)
        assert node.payload.n == 16
        assert node.payload.vehicles == 8

    def test_empty_input_rejected(self):
        with pytest.raises(ParseError):
            create_problem("vrp", "")

    def test_unknown_type(self):
        with pytest.raises(UnknownProblemType):
            create_problem("knapsack", "whatever")

    def test_tsp_type_rejects_cvrp_file(self, bundled_instance_dir):
        text = (bundled_instance_dir / "P-n16-k8.vrp").read_text()
        with pytest.raises(ParseError):
            create_problem("tsp", text)

    def test_qubo_and_sat_and_maxcut(self):
        assert create_problem("qubo", "qubo 2\n0 0 -1\n").payload.n == 2
        assert create_problem("sat", "p cnf 1 1\n1 0").payload.num_vars == 1
        assert create_problem("max-cut", "p edge 3 1\ne 1 2").payload.n == 3

    def test_ids_are_unique(self):
        ids = {create_problem("sat", "p cnf 1 1\n1 0").id for _ in range(50)}
        assert len(ids) == 50


class TestTransitions:
    def test_ready_to_solving(self):
        node = ProblemNode(id=new_id(), type_id="tsp", state=READY)
        transition(node, SOLVING)
        assert node.state == SOLVING

    def test_solved_to_solving_illegal(self):
        node = ProblemNode(id=new_id(), type_id="tsp", state=SOLVED)
        with pytest.raises(IllegalTransition):
            transition(node, SOLVING)
        assert node.state == SOLVED  # rejected without mutation

    def test_failed_retry_path(self):
        node = ProblemNode(id=new_id(), type_id="tsp", state=FAILED)
        transition(node, READY)
        assert node.state == READY

    def test_needs_input_becomes_ready(self):
        node = ProblemNode(id=new_id(), type_id="cluster-set", state=NEEDS_INPUT)
        transition(node, READY)
        assert node.state == READY

    def test_unknown_state_rejected(self):
        node = ProblemNode(id=new_id(), type_id="tsp", state=READY)
        with pytest.raises(IllegalTransition):
            transition(node, "Paused")


class TestSolveResult:
    def test_negative_wall_rejected(self):
        with pytest.raises(ValueError):
            SolveResult(payload=None, objective=1.0, feasible=False,
                        wall_ms=-1, solver_id="s", backend_id="b")

    def test_feasible_needs_finite_objective(self):
        with pytest.raises(ValueError):
            SolveResult(payload=Infeasibility("x"), objective=float("inf"),
                        feasible=True, wall_ms=0, solver_id="s", backend_id="b")


class TestSerde:
    def build_tree(self):
        root = create_problem("tsp", TSP_TEXT)
        root.solver_id = "tsp-native"
        child = ProblemNode(id=new_id(), type_id="qubo", state=NEEDS_INPUT)
        root.children.append(child)
        root.settings["penalty_scale"] = 2
        return root

    def test_roundtrip_identity(self):
        root = self.build_tree()
        again = tree_from_json(tree_to_json(root))
        assert again == root

    def test_roundtrip_with_results(self):
        from metasolve.routing import Tour

        root = create_problem("tsp", TSP_TEXT)
        root.solver_id = "tsp-native"
        root.state = SOLVED
        root.result = SolveResult(
            payload=Tour(order=[0, 1, 2, 3], cost=40), objective=40.0,
            feasible=True, wall_ms=3, solver_id="tsp-native", backend_id="local-cpu-0",
        )
        again = tree_from_json(tree_to_json(root))
        assert again == root
        assert again.result.payload.cost == 40

    def test_clone_fresh_ids(self):
        root = self.build_tree()
        copy = clone_tree(root)
        assert copy != root
        assert copy.payload == root.payload
        assert {n.id for n in copy.walk()}.isdisjoint({n.id for n in root.walk()})


class TestValidate:
    def test_clean_tree(self):
        assert validate_tree(create_problem("tsp", TSP_TEXT)) == []

    def test_children_without_solver_flagged(self):
        root = create_problem("tsp", TSP_TEXT)
        root.children.append(ProblemNode(id=new_id(), type_id="qubo"))
        assert any("without a selected solver" in p for p in validate_tree(root))

    def test_solved_parent_with_pending_child_flagged(self):
        root = create_problem("tsp", TSP_TEXT)
        root.solver_id = "x"
        root.children.append(ProblemNode(id=new_id(), type_id="qubo", state=READY))
        root.state = SOLVED
        root.result = SolveResult(payload=Infeasibility("n/a"), objective=0.0,
                                  feasible=False, wall_ms=0, solver_id="x", backend_id="b")
        assert any("while child" in p for p in validate_tree(root))

    def test_walk_and_find(self):
        root = self.tree()
        assert root.find(root.children[0].id) is root.children[0]
        assert root.parent_of(root.children[0].id) is root

    def tree(self):
        root = create_problem("tsp", TSP_TEXT)
        root.solver_id = "s"
        root.children.append(ProblemNode(id=new_id(), type_id="qubo"))
        return root
