"""Fused test accuracy of the toy model over a grid of Hölder exponents."""

from _common import emit, load_config, parser, table

from hdmvl.experiments import GAMMA_GRID, sweep_gamma


def main():
    p = parser(__doc__)
    p.add_argument("--grid", type=float, nargs="+", default=list(GAMMA_GRID))
    args = p.parse_args()
    rows = sweep_gamma(load_config(args.config), args.grid)
    table(rows, ["gamma", "fused_accuracy", "mean_uncertainty", "final_epoch_loss", "converged"])
    emit(rows, args.out)


if __name__ == "__main__":
    main()
