"""Record service responses for the web client's fixture-driven tests.

Drives the canonical workflow (submit VRP, select the two-phase clustering,
execute stepwise to a composed result, compare two paths) against the real
service in-process and captures every response the UI consumes, so the
frontend test suite replays genuine wire documents without a server.

Usage: python scripts/record_ui_fixtures.py
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from fastapi.testclient import TestClient

from metasolve.service import ServiceConfig, create_app

OUT = Path(__file__).resolve().parents[1] / "frontend" / "test" / "fixtures.json"

VRP_INPUT = """NAME : ui-demo-k2
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


def wait_settled(client: TestClient, url: str, timeout: float = 60.0) -> dict:
    previous = None
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(url).json()
        text = json.dumps(doc, sort_keys=True)
        if text == previous and '"Solving"' not in text:
            return doc
        previous = text
        time.sleep(0.05)
    raise RuntimeError(f"{url} did not settle")


def main() -> None:
    import tempfile

    fixtures: dict = {"vrp_input": VRP_INPUT}
    with tempfile.TemporaryDirectory() as store:
        app = create_app(ServiceConfig(store_dir=store))
        with TestClient(app) as client:
            fixtures["problem_types"] = client.get("/problem-types").json()
            fixtures["strategy_paths_vrp"] = client.get(
                "/strategies/vrp/paths", params={"max_clusterings": 1}
            ).json()

            created = client.post(
                "/problems/vrp", content=VRP_INPUT, headers={"content-type": "text/plain"}
            ).json()
            fixtures["created"] = created
            problem_id = created["id"]
            url = f"/problems/vrp/{problem_id}"

            suggestions: dict = {}
            suggestions[problem_id] = client.get(
                f"{url}/suggestions", params={"node": problem_id, "speed_weight": 0.5}
            ).json()

            errors = {
                "unknown_node": client.get(f"{url}/suggestions", params={"node": "missing"}).json(),
                "type_mismatch": client.patch(
                    f"{url}/nodes/{problem_id}", json={"solver_id": "dpll"}
                ).json(),
            }

            patches: dict = {}
            patches[f"{problem_id}:two-phase-clustering"] = client.patch(
                f"{url}/nodes/{problem_id}", json={"solver_id": "two-phase-clustering"}
            ).json()

            snapshots: list[dict] = []
            client.post(f"{url}/execute", json={"mode": "stepwise", "node_id": problem_id, "seed": 1})
            fanned = wait_settled(client, url)
            snapshots.append(fanned)

            placeholder = fanned["tree"]["children"][0]
            for child in placeholder["children"]:
                suggestions[child["id"]] = client.get(
                    f"{url}/suggestions", params={"node": child["id"], "speed_weight": 0.5}
                ).json()
            for child in placeholder["children"]:
                patches[f"{child['id']}:tsp-native"] = client.patch(
                    f"{url}/nodes/{child['id']}", json={"solver_id": "tsp-native"}
                ).json()
                client.post(
                    f"{url}/execute", json={"mode": "stepwise", "node_id": child["id"], "seed": 2}
                )
                snapshots.append(wait_settled(client, url))

            client.post(f"{url}/execute", json={"mode": "stepwise", "node_id": placeholder["id"], "seed": 1})
            snapshots.append(wait_settled(client, url))
            client.post(f"{url}/execute", json={"mode": "stepwise", "node_id": problem_id, "seed": 1})
            final = wait_settled(client, url)
            snapshots.append(final)
            assert final["tree"]["state"] == "Solved", final["tree"]["state"]

            fixtures["suggestions"] = suggestions
            fixtures["patches"] = patches
            fixtures["snapshots_after_execute"] = snapshots

            compare = client.post(
                f"{url}/compare",
                json={"paths": ["direct", "two-phase/cluster-tsp"], "trials": 2, "seed": 5},
            ).json()
            fixtures["compare_accepted"] = compare
            poll = f"{url}/comparisons/{compare['comparison_id']}"
            deadline = time.time() + 60
            status = client.get(poll).json()
            while status["status"] == "running" and time.time() < deadline:
                time.sleep(0.05)
                status = client.get(poll).json()
            assert status["status"] == "done", status
            fixtures["comparison_done"] = status

            fixtures["errors"] = errors

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixtures, indent=2, sort_keys=True))
    rows = len(fixtures["comparison_done"]["report"]["rows"])
    print(f"wrote {OUT} ({len(snapshots)} tree snapshots, {rows} comparison rows)")


if __name__ == "__main__":
    main()
