"""Walk the labeling session HTTP API end to end, in process.

Creates a session against the service app, labels every item the server
serves (accepting correct suggestions, correcting wrong ones), and prints the
metrics after each round. The same API is what `tieredal serve` exposes over
the network.
"""

import tempfile

from fastapi.testclient import TestClient

from tieredal import ExperimentConfig, TrainConfig, generate_blobs
from tieredal.service import create_app

ds = generate_blobs(num_classes=4, per_class=40, dim=4, spread=1.5, rng_seed=2)
cfg = ExperimentConfig(blob_classes=4, blob_per_class=40, blob_dim=4,
                       blob_spread=1.5, seed_size=20, b1=4, b2=4, b3=2,
                       rounds=3, train=TrainConfig(t_max=30), rng_seed=2)

out_dir = tempfile.mkdtemp(prefix="labeling-demo-")
client = TestClient(create_app(ds, out_dir, base_cfg=cfg))

sid = client.post("/sessions", json={"config": {}}).json()["session_id"]
print(f"session {sid}, logs in {out_dir}")

while True:
    item = client.get(f"/sessions/{sid}/next").json()
    if "item_token" not in item:
        print(f"\nsession phase: {item['phase']}")
        break
    truth = int(ds.labels[item["item_index"]])
    client.post(f"/sessions/{sid}/labels", json={
        "item_token": item["item_token"], "final_label": truth,
        "client_elapsed_ms": 30,
    })
    action = "accept" if truth == item["suggested_label"] else "correct"
    print(f"  {item['item_token']} ({item['tier']}): "
          f"suggested {item['suggested_label']}, {action}")
    metrics = client.get(f"/sessions/{sid}/metrics").json()
    if metrics["phase"] != "awaiting_labels":
        print(f"round {metrics['round']} done: accuracy "
              f"{metrics['test_accuracy']:.3f}, cost {metrics['cost_cumulative']}")

stats = client.get(f"/sessions/{sid}/stats/ratios")
if stats.status_code == 200:
    body = stats.json()
    # in-process round trips are sub-millisecond, hence the tiny means
    print(f"verify mean {body['mean_cv']:.2e}s, correct mean "
          f"{body['mean_ca']:.2e}s, ratio {body['mean_ratio']:.2f}")
