"""Per-class submodular mutual information selection, step by step.

Trains a seed model on blob data, then walks through the intermediate tier:
class quotas, per-class greedy maximization, and the final suggestion batch.
"""

import numpy as np

from tieredal import (TrainConfig, compute_quotas, generate_blobs,
                      grad_embeddings, greedy_maximize, smi_suggest,
                      split_pools, train)

ds = generate_blobs(num_classes=5, per_class=40, dim=4, spread=1.5, rng_seed=3)
pool = split_pools(ds, seed_size=25, rng_seed=1)
model = train(pool, ds, TrainConfig(t_max=40, rng_seed=1))

quota = compute_quotas(pool, ds.num_classes, b2=8)
print("labeled per class:",
      {c: len(pool.labels_of_class(c)) for c in range(ds.num_classes)})
print("quota per class:  ", quota.per_class)

# one class in detail: greedy gains over the unlabeled candidates
c = 0
members = pool.labels_of_class(c)
G_c = grad_embeddings(model, ds.features[members], np.full(len(members), c))
cand = grad_embeddings(model, ds.features[pool.unlabeled_indices])
trace = greedy_maximize(cand, G_c, quota.per_class[c])
print(f"\nclass {c} greedy picks (position, gain):")
for pos, gain in zip(trace.selected, trace.gains):
    print(f"  {pool.unlabeled_indices[pos]:>4}  {gain:.4f}")

batch = smi_suggest(pool, ds, model, b2=8)
print("\nfull suggestion batch:")
for item in batch.items:
    truth = ds.labels[item.index]
    mark = "ok" if item.suggested_label == truth else f"truth={truth}"
    print(f"  item {item.index:>4}  suggest {item.suggested_label}  {mark}")
