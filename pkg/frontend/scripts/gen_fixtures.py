"""Capture wire-format fixtures for the frontend tests from the real backend.

Runs the fib, gradient-descent, and longest-weighted-path subjects through
the HTTP layer so the JSON matches what the browser would receive, then
freezes the responses under tests/fixtures/.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from tracelens.api import create_app
from tracelens.config import Config

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"

FIB_SRC = """\
def fib(n):
    if n <= 2:
        val = 1
    else:
        val = fib(n - 1) + fib(n - 2)
    return val

print(fib(7))
"""

GD_SRC = """\
def gradient(x):
    return 2.0 * (x - 3.0)

rate = 1.5
x = 10.0
for step in range(1200):
    x = x - rate * gradient(x)
print(x)
"""

LWP_SRC = """\
nodes = ["Init", "A", "B", "Barrier", "C", "Finalize"]
edge_list = [
    ("Init", "A", 0, 1),
    ("Init", "B", 0, 2),
    ("Init", "Barrier", 0, 2),
    ("Init", "Barrier", 1, 5),
    ("A", "Barrier", 0, 1),
    ("B", "Barrier", 0, 1),
    ("Barrier", "C", 0, 3),
    ("C", "Finalize", 0, 1),
]
edges = {}
preds = {}
for u, v, key, w in edge_list:
    pair = (u, v)
    if pair not in edges:
        edges[pair] = {}
    edges[pair][key] = w
    if v not in preds:
        preds[v] = []
    if u not in preds[v]:
        preds[v].append(u)

longest = {}
for node in nodes:
    label = node
    best = 0
    for pred in preds.get(node, []):
        edge_keys = edges[(pred, node)]
        first_key = list(edge_keys)[0]
        weight = edge_keys[first_key]
        path_weight = longest[pred] + weight
        if path_weight > best:
            best = path_weight
    longest[node] = best
print(longest["Finalize"])
"""


def save(name: str, payload) -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / f"{name}.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
    print(f"wrote {name}.json")


def capture_fib(client: TestClient) -> None:
    sid = client.post("/api/v1/sessions", json={"files": {"fib.py": FIB_SRC}, "entry": "fib.py"}).json()["id"]
    client.put(f"/api/v1/sessions/{sid}/spec", json={"targets": [{"name": "val"}]})
    assert client.post(f"/api/v1/sessions/{sid}/trace").json()["ok"]
    save("fib_tree", client.get(f"/api/v1/sessions/{sid}/tree", params={"depth": 30}).json())
    save("fib_tree_shallow", client.get(f"/api/v1/sessions/{sid}/tree", params={"depth": 3}).json())
    save(
        "fib_scatter",
        client.post(f"/api/v1/sessions/{sid}/plot", json={"names": ["val"], "plot_kind": "scatter", "with_time": True}).json(),
    )
    save("fib_names", client.get(f"/api/v1/sessions/{sid}/names").json())
    tree = client.get(f"/api/v1/sessions/{sid}/tree", params={"depth": 30}).json()

    def find(node, pred):
        if pred(node):
            return node
        for child in node["children"]:
            hit = find(child, pred)
            if hit:
                return hit
        return None

    record = find(tree["root"], lambda n: n["type"] == "tracked" and n["line"] == 5)
    save("fib_deps", client.get(f"/api/v1/sessions/{sid}/deps/{record['id']}").json())
    call = find(tree["root"], lambda n: n["type"] == "call")
    save("fib_span_call", client.get(f"/api/v1/sessions/{sid}/span/{call['id']}").json())
    sub = client.post(
        f"/api/v1/sessions/{sid}/plot",
        json={"names": ["val"], "plot_kind": "scatter", "with_time": True, "filters": {"subtree_root": call["children"][0]["id"]}},
    ).json()
    save("fib_scatter_subtree", {"root": call["children"][0]["id"], "plot": sub})


def capture_gd(client: TestClient) -> None:
    sid = client.post("/api/v1/sessions", json={"files": {"gd.py": GD_SRC}, "entry": "gd.py"}).json()["id"]
    client.put(f"/api/v1/sessions/{sid}/spec", json={"targets": [{"name": "x", "scope": ""}]})
    assert client.post(f"/api/v1/sessions/{sid}/trace").json()["ok"]
    save(
        "gd_histogram",
        client.post(f"/api/v1/sessions/{sid}/plot", json={"names": ["x"], "plot_kind": "histogram"}).json(),
    )
    save("gd_names", client.get(f"/api/v1/sessions/{sid}/names").json())


def capture_lwp(client: TestClient) -> None:
    sid = client.post("/api/v1/sessions", json={"files": {"lwp.py": LWP_SRC}, "entry": "lwp.py"}).json()["id"]
    response = client.put(
        f"/api/v1/sessions/{sid}/spec",
        json={
            "targets": [
                {"name": "label", "scope": ""},
                {"name": "path_weight", "scope": ""},
                {"name": "weight", "scope": ""},
            ],
            "customs": [
                {"label": "n_keys", "expression_text": "len(edge_keys)", "anchor_name": "weight", "anchor_scope": ""}
            ],
            "exclusions": ["list"],
        },
    )
    assert response.status_code == 200, response.text
    assert client.post(f"/api/v1/sessions/{sid}/trace").json()["ok"]
    save("lwp_tree", client.get(f"/api/v1/sessions/{sid}/tree", params={"depth": 30}).json())
    bar = client.post(f"/api/v1/sessions/{sid}/plot", json={"names": ["label"], "plot_kind": "bar"}).json()
    save("lwp_label_bar", bar)

    barrier_row = next(r for r in bar["rows"] if r["value"] == "Barrier")
    iteration_id = barrier_row["parent_id"]
    sub = client.post(
        f"/api/v1/sessions/{sid}/plot",
        json={
            "names": ["path_weight"],
            "plot_kind": "scatter",
            "with_time": True,
            "filters": {"subtree_root": iteration_id},
        },
    ).json()
    save("lwp_barrier_weights", {"iteration": iteration_id, "plot": sub})
    grouped = client.post(
        f"/api/v1/sessions/{sid}/plot",
        json={
            "names": ["n_keys"],
            "plot_kind": "small_multiples",
            "group_by": {"kind": "name", "key": "label"},
        },
    ).json()
    save("lwp_nkeys_grouped", grouped)


def main() -> None:
    client = TestClient(create_app(Config(timeout_s=60)))
    capture_fib(client)
    capture_gd(client)
    capture_lwp(client)


if __name__ == "__main__":
    main()
