"""Train the toy model with KL, Cauchy-Schwarz and Hölder regularizers.

Also prints, for a few random pairs, the Hölder value next to the KL value
on the same Dirichlets. This is a comparison report only; no ordering
between the two is asserted.
"""

import numpy as np
from _common import emit, load_config, parser, table

from hdmvl import dirichlet as dr
from hdmvl.experiments import divergence_ablation


def main():
    p = parser(__doc__)
    p.add_argument("--pairs", type=int, default=5)
    args = p.parse_args()
    cfg = load_config(args.config)
    rows = divergence_ablation(cfg)
    table(rows, ["divergence", "fused_accuracy", "mean_uncertainty", "final_epoch_loss"])
    rng = np.random.default_rng(0)
    pairs = []
    for _ in range(args.pairs):
        a, b = rng.uniform(1, 6, 3), rng.uniform(1, 6, 3)
        pairs.append({"p": a.tolist(), "q": b.tolist(),
                      "holder": dr.holder_divergence(a, b, cfg.train.gamma),
                      "kl": dr.kl_divergence(a, b)})
    emit({"training": rows, "pairs": pairs}, args.out)


if __name__ == "__main__":
    main()
