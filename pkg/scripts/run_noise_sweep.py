"""Gaussian noise on one view: mean fused uncertainty and accuracy per variance."""

from _common import emit, load_config, parser, table

from hdmvl.experiments import NOISE_VARIANCES, sweep_noise


def main():
    p = parser(__doc__)
    p.add_argument("--variances", type=float, nargs="+", default=list(NOISE_VARIANCES))
    p.add_argument("--view", type=int, default=1)
    p.add_argument("--repeats", type=int, default=4)
    args = p.parse_args()
    rows = sweep_noise(load_config(args.config), args.variances, args.view, args.repeats)
    table(rows, ["variance", "fused_accuracy", "mean_uncertainty"])
    emit(rows, args.out)


if __name__ == "__main__":
    main()
