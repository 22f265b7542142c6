"""Loss + gradient wall-clock comparison.

The ranking loss needs one sort per example and two running log-sum-exp
passes, so the per-batch cost stays within a small factor of the divergence
loss and grows roughly linearly in the class count.
"""

from pldlab.bench import bench_losses, growth_exponent

results = bench_losses(
    sizes=((256, 128), (256, 256), (256, 512), (256, 1024)),
    kinds=("ce", "kd", "dist", "pld"),
    trials=11,
    warmup=3,
)

print(f"{'loss':<6} {'classes':>8} {'median ms':>10}")
for r in results:
    print(f"{r.loss_kind:<6} {r.n_classes:>8} {r.median_seconds * 1e3:>10.3f}")

at_1024 = {r.loss_kind: r.median_seconds for r in results if r.n_classes == 1024}
print(f"\npld / kd at C=1024: {at_1024['pld'] / at_1024['kd']:.2f}x")
print(f"pld growth exponent in C: {growth_exponent(results, 'pld'):.2f} "
      "(1.0 would be exactly linear)")
