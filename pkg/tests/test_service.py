import time

import pytest
from fastapi.testclient import TestClient

from metasolve.service import ServiceConfig, create_app

SQUARE_VRP = """NAME : demo-k2
TYPE : CVRP
DIMENSION : 5
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 2
NODE_COORD_SECTION
1 5 5
2 0 0
3 0 10
4 10 10
5 10 0
DEMAND_SECTION
1 0
2 1
3 1
4 1
5 1
DEPOT_SECTION
1
-1
EOF
"""

SQUARE_TSP = """NAME : square
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


@pytest.fixture()
def client(tmp_path):
    app = create_app(ServiceConfig(store_dir=str(tmp_path / "store")))
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def wait_for(client, url, predicate, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(url).json()
        if predicate(doc):
            return doc
        time.sleep(0.02)
    raise AssertionError(f"condition not reached for {url}")


def create_vrp(client):
    response = client.post(
        "/problems/vrp", content=SQUARE_VRP, headers={"content-type": "text/plain"}
    )
    assert response.status_code == 201
    return response.json()


class TestProblemTypes:
    def test_lists_five_types(self, client):
        doc = client.get("/problem-types").json()
        assert {t["id"] for t in doc} == {"vrp", "tsp", "qubo", "sat", "max-cut"}
        assert all("name" in t and "input_format" in t for t in doc)

    def test_stable_across_calls(self, client):
        assert client.get("/problem-types").json() == client.get("/problem-types").json()


class TestCreate:
    def test_valid_tsplib(self, client):
        doc = create_vrp(client)
        assert doc["tree"]["state"] == "ReadyToSolve"
        assert doc["tree"]["type_id"] == "vrp"

    def test_garbage_body_400_with_line(self, client):
        response = client.post("/problems/vrp", content="DIMENSION nonsense")
        assert response.status_code == 400
        body = response.json()
        assert body["code"] == "ParseError"
        assert "line" in body

    def test_unknown_type_404(self, client):
        response = client.post("/problems/knapsack", content="x")
        assert response.status_code == 404
        assert response.json()["code"] == "UnknownProblemType"


class TestFetch:
    def test_roundtrip(self, client):
        doc = create_vrp(client)
        fetched = client.get(f"/problems/vrp/{doc['id']}")
        assert fetched.status_code == 200
        assert fetched.json()["tree"] == doc["tree"]

    def test_unknown_id(self, client):
        assert client.get("/problems/vrp/deadbeef").status_code == 404

    def test_survives_restart(self, client, tmp_path):
        doc = create_vrp(client)
        fresh = create_app(ServiceConfig(store_dir=str(tmp_path / "store")))
        with TestClient(fresh) as second:
            again = second.get(f"/problems/vrp/{doc['id']}")
            assert again.status_code == 200
            assert again.json()["tree"] == doc["tree"]


class TestPatch:
    def test_select_clustering_creates_placeholder(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        response = client.patch(
            f"/problems/vrp/{root_id}/nodes/{root_id}",
            json={"solver_id": "two-phase-clustering"},
        )
        assert response.status_code == 200
        tree = response.json()["tree"]
        assert len(tree["children"]) == 1
        assert tree["children"][0]["type_id"] == "cluster-set"

    def test_settings_stored_and_echoed(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        response = client.patch(
            f"/problems/vrp/{root_id}/nodes/{root_id}",
            json={"solver_id": "kmeans-clustering", "settings": {"clusters": 3}},
        )
        assert response.json()["tree"]["settings"] == {"clusters": 3}

    def test_idempotent_repeat(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        body = {"solver_id": "two-phase-clustering"}
        first = client.patch(f"/problems/vrp/{root_id}/nodes/{root_id}", json=body).json()
        second = client.patch(f"/problems/vrp/{root_id}/nodes/{root_id}", json=body).json()
        assert first == second

    def test_type_mismatch_422(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        response = client.patch(
            f"/problems/vrp/{root_id}/nodes/{root_id}", json={"solver_id": "tsp-native"}
        )
        assert response.status_code == 422
        assert response.json()["code"] == "TypeMismatch"

    def test_patch_solved_node_409(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        client.patch(f"/problems/vrp/{root_id}/nodes/{root_id}", json={"solver_id": "vrp-native"})
        client.post(f"/problems/vrp/{root_id}/execute", json={"mode": "complete", "seed": 1})
        wait_for(client, f"/problems/vrp/{root_id}", lambda d: d["tree"]["state"] == "Solved")
        response = client.patch(
            f"/problems/vrp/{root_id}/nodes/{root_id}", json={"solver_id": "vrp-native"}
        )
        assert response.status_code == 409


class TestExecute:
    def test_complete_solves_selected_tree(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        client.patch(f"/problems/vrp/{root_id}/nodes/{root_id}", json={"solver_id": "vrp-native"})
        response = client.post(
            f"/problems/vrp/{root_id}/execute", json={"mode": "complete", "seed": 3}
        )
        assert response.status_code == 202
        assert response.headers["Location"] == f"/problems/vrp/{root_id}"
        final = wait_for(client, f"/problems/vrp/{root_id}", lambda d: d["tree"]["state"] == "Solved")
        assert final["tree"]["result"]["feasible"] is True

    def test_repeat_seed_identical_objective(self, client):
        objectives = []
        for _ in range(2):
            doc = create_vrp(client)
            root_id = doc["id"]
            client.patch(
                f"/problems/vrp/{root_id}/nodes/{root_id}",
                json={"solver_id": "two-phase-clustering"},
            )
            client.post(f"/problems/vrp/{root_id}/execute", json={"mode": "complete", "seed": 42})
            final = wait_for(client, f"/problems/vrp/{root_id}", lambda d: d["tree"]["state"] == "Solved")
            objectives.append(final["tree"]["result"]["objective"])
        assert objectives[0] == objectives[1]

    def test_stepwise_requires_solved_children(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        client.patch(
            f"/problems/vrp/{root_id}/nodes/{root_id}",
            json={"solver_id": "two-phase-clustering"},
        )
        # expansion phase is fine
        r1 = client.post(
            f"/problems/vrp/{root_id}/execute",
            json={"mode": "stepwise", "node_id": root_id, "seed": 0},
        )
        assert r1.status_code == 202
        tree = wait_for(
            client, f"/problems/vrp/{root_id}",
            lambda d: d["tree"]["children"][0]["children"],
        )["tree"]
        # composing the root now must 409: cluster children are unsolved
        r2 = client.post(
            f"/problems/vrp/{root_id}/execute",
            json={"mode": "stepwise", "node_id": root_id, "seed": 0},
        )
        assert r2.status_code == 409

    def test_invalid_mode_422(self, client):
        doc = create_vrp(client)
        response = client.post(f"/problems/vrp/{doc['id']}/execute", json={"mode": "warp"})
        assert response.status_code == 422

    def test_stepwise_full_loop_states_visible(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        url = f"/problems/vrp/{root_id}"
        client.patch(f"{url}/nodes/{root_id}", json={"solver_id": "two-phase-clustering"})
        client.post(f"{url}/execute", json={"mode": "stepwise", "node_id": root_id, "seed": 0})
        tree = wait_for(client, url, lambda d: d["tree"]["children"][0]["children"])["tree"]
        placeholder = tree["children"][0]
        for child in placeholder["children"]:
            client.patch(f"{url}/nodes/{child['id']}", json={"solver_id": "tsp-native"})
            client.post(f"{url}/execute", json={"mode": "stepwise", "node_id": child["id"], "seed": 1})
        wait_for(
            client, url,
            lambda d: all(c["state"] == "Solved" for c in d["tree"]["children"][0]["children"]),
        )
        client.post(f"{url}/execute", json={"mode": "stepwise", "node_id": placeholder["id"], "seed": 0})
        wait_for(client, url, lambda d: d["tree"]["children"][0]["state"] == "Solved")
        client.post(f"{url}/execute", json={"mode": "stepwise", "node_id": root_id, "seed": 0})
        final = wait_for(client, url, lambda d: d["tree"]["state"] == "Solved")
        assert final["tree"]["result"]["feasible"] is True


class TestSuggestions:
    def test_mirror_of_engine(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        response = client.get(
            f"/problems/vrp/{root_id}/suggestions", params={"node": root_id, "speed_weight": 0.5}
        )
        assert response.status_code == 200
        body = response.json()
        assert body["confidence"] in ("high", "low")
        ids = [e["solver_id"] for e in body["ranked"]]
        assert set(ids) == {"vrp-native", "kmeans-clustering", "two-phase-clustering"}

    def test_unknown_node_404(self, client):
        doc = create_vrp(client)
        response = client.get(f"/problems/vrp/{doc['id']}/suggestions", params={"node": "nope"})
        assert response.status_code == 404


class TestCompare:
    def test_two_paths_report(self, client):
        doc = create_vrp(client)
        root_id = doc["id"]
        response = client.post(
            f"/problems/vrp/{root_id}/compare",
            json={"paths": ["direct", "two-phase/cluster-tsp"], "trials": 2, "seed": 5},
        )
        assert response.status_code == 202
        poll = response.json()["poll"]
        done = wait_for(client, poll, lambda d: d["status"] == "done")
        assert len(done["report"]["rows"]) == 4
        assert set(done["report"]["per_path"]) == {"direct", "two-phase/cluster-tsp"}

    def test_invalid_path_rejected_before_launch(self, client):
        doc = create_vrp(client)
        response = client.post(
            f"/problems/vrp/{doc['id']}/compare",
            json={"paths": ["direct", "warp-drive"], "trials": 1},
        )
        assert response.status_code == 422

    def test_failing_path_rows_flagged(self, client):
        text = SQUARE_VRP.replace("1 0\n2 1\n3 1\n4 1\n5 1", "1 0\n2 2\n3 2\n4 2\n5 2")
        response = client.post("/problems/vrp", content=text)
        root_id = response.json()["id"]
        r = client.post(
            f"/problems/vrp/{root_id}/compare",
            json={"paths": ["two-phase/cluster-tsp", "direct"], "trials": 1, "seed": 0},
        )
        done = wait_for(client, r.json()["poll"], lambda d: d["status"] == "done")
        rows = {row["path"]: row for row in done["report"]["rows"]}
        assert rows["two-phase/cluster-tsp"]["feasible"] is False
