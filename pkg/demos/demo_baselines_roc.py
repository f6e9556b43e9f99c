#!/usr/bin/env python3
"""Compare the demixing solver against its baselines on a hard instance.

Uses a planted instance whose low-rank part has rank above the number of
dictionary atoms; pseudo-inverse reductions lose the low-rank structure
there, while solving in the original space does not.  Every method is
scored per voxel and ranked by ROC AUC over a lambda sweep.
"""

import numpy as np

from hsdemix import (
    DemixConfig,
    LabeledScores,
    Sparsity,
    SynthSpec,
    lambda_sweep,
    matched_filter,
    matched_filter_pinv,
    matrix,
    roc,
    support_labels,
    synthesize,
    transform_pinv,
)


def main():
    spec = SynthSpec(f=50, d=10, nm=400, r=15, mode=Sparsity.ENTRY, sparsity=40,
                     l_scale=20.0, s_scale=1.0, seed=42)
    m, gt, dic = synthesize(spec)
    labels = support_labels(gt)
    print(f"instance: rank(L) = {spec.r} > atoms = {spec.d}, "
          f"{int(labels.sum())} target voxels of {spec.nm}")

    base = DemixConfig(mode=Sparsity.ENTRY, lam=1.0, max_iters=1500, rel_tol=1e-5)
    best, _ = lambda_sweep(m, dic.mat, base, 20, labels, jobs=4)
    print(f"demix (entry-wise), 20-lambda sweep: best AUC {best.auc:.4f}")

    mt = transform_pinv(m, dic.mat)
    best_r, _ = lambda_sweep(mt, matrix(np.eye(10)), base, 20, labels, jobs=4)
    print(f"rpca on pseudo-inversed data:        best AUC {best_r.auc:.4f}")

    for name, scores in (
        ("matched filter", matched_filter(m, dic.mat)),
        ("matched filter (pinv data)", matched_filter_pinv(m, dic.mat)),
    ):
        curve = roc(LabeledScores(scores=scores, labels=labels))
        flag = " (flipped)" if curve.flipped else ""
        print(f"{name + ':':36s} AUC {curve.auc:.4f}{flag}")


if __name__ == "__main__":
    main()
