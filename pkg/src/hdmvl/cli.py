"""Command-line entry point.

Every successful command prints exactly one JSON document on stdout. Exit
status: 0 success, 1 runtime failure, 2 usage error. Human-readable notes go
to stderr. ``--config FILE`` supplies flat JSON settings that explicit flags
override; ``HDMVL_SEED`` sets the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import dirichlet as dr
from .data import complementary_spec, generate_synthetic, save_manifest
from .experiments import (
    GAMMA_GRID,
    NOISE_VARIANCES,
    ExperimentConfig,
    divergence_ablation,
    fit,
    split_dataset,
    sweep_gamma,
    sweep_noise,
)
from .network import MultiViewModel
from .opinions import Opinion, combine_all
from .trainer import evaluate

SEED_ENV = "HDMVL_SEED"
MAX_INLINE_K = 16


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# flag dest -> ExperimentConfig/TrainConfig key
_EXPERIMENT_FLAGS = {
    "manifest": "manifest",
    "samples_per_class": "samples_per_class",
    "data_seed": "data_seed",
    "test_fraction": "test_fraction",
    "split_seed": "split_seed",
    "hidden": "hidden",
    "pseudo_hidden": "pseudo_hidden",
    "epochs": "epochs",
    "batch_size": "batch_size",
    "learning_rate": "learning_rate",
    "weight_decay": "weight_decay",
    "divergence": "divergence",
    "gamma": "gamma",
    "t_anneal": "t_anneal",
    "lr_decay": "lr_decay",
    "lr_decay_every": "lr_decay_every",
    "seed": "seed",
}


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of flat settings (flags override)")
    p.add_argument("--manifest", help="dataset manifest; default is the synthetic fixture")
    p.add_argument("--samples-per-class", type=int)
    p.add_argument("--data-seed", type=int)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--split-seed", type=int)
    p.add_argument("--hidden", type=_ints, help="hidden sizes of each view net, e.g. 16 or 32,16")
    p.add_argument("--pseudo-hidden", type=_ints)
    p.add_argument("--no-pseudo", action="store_true", default=None, help="disable the pseudo-view")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--weight-decay", type=float)
    p.add_argument("--divergence", choices=["holder", "kl", "cs"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--t-anneal", type=int)
    p.add_argument("--lr-decay", type=float)
    p.add_argument("--lr-decay-every", type=int)
    p.add_argument("--seed", type=int)


def _experiment_config(args) -> ExperimentConfig:
    settings = {"seed": _default_seed()}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        settings.update(loaded)
        if loaded.get("manifest") and not os.path.isabs(loaded["manifest"]):
            base = os.path.dirname(os.path.abspath(args.config))
            settings["manifest"] = os.path.join(base, loaded["manifest"])
    for dest, key in _EXPERIMENT_FLAGS.items():
        val = getattr(args, dest, None)
        if val is not None:
            settings[key] = val
    if getattr(args, "no_pseudo", None):
        settings["use_pseudo"] = False
    try:
        return ExperimentConfig.from_dict(settings)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    except TypeError as exc:
        raise UsageError(f"bad config value: {exc}") from None


def _concentration(inline, path, name):
    if (inline is None) == (path is None):
        raise UsageError(f"give exactly one of --{name} or --{name}-file")
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values = json.load(fh)
    else:
        values = inline
        if len(values) > MAX_INLINE_K:
            raise UsageError(f"--{name} has K={len(values)} > {MAX_INLINE_K}; use --{name}-file")
    return dr.DirichletParams(np.asarray(values, dtype=float))


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_gen_data(args):
    seed = args.seed if args.seed is not None else _default_seed()
    spec = complementary_spec(args.samples_per_class, seed)
    ds = generate_synthetic(spec)
    path = save_manifest(ds, args.out)
    _note(f"wrote {ds.n} samples, {ds.num_views} views to {path}")
    return {"manifest": path, "n": ds.n, "num_views": ds.num_views, "view_dims": ds.view_dims,
            "num_classes": ds.num_classes, "seed": seed}


def cmd_train(args):
    cfg = _experiment_config(args)
    tr, te = split_dataset(cfg)
    model, history = fit(cfg, tr)
    model.save(args.checkpoint)
    _note(f"epoch 1 loss {history[0].total:.6f} -> epoch {len(history)} loss {history[-1].total:.6f}")
    return {
        "checkpoint": args.checkpoint,
        "config": cfg.to_dict(),
        "history": [h.to_json() for h in history],
        "train_size": tr.n,
        "test_size": te.n,
    }


def cmd_eval(args):
    cfg = _experiment_config(args)
    tr, te = split_dataset(cfg)
    model = MultiViewModel.load(args.checkpoint)
    ds = {"test": te, "train": tr}[args.split]
    return {"split": args.split, "n": ds.n, "metrics": evaluate(model, ds).to_json()}


def cmd_divergence(args):
    p = _concentration(args.p, args.p_file, "p")
    q = _concentration(args.q, args.q_file, "q")
    if args.kind == "js":
        est, se = dr.js_divergence_mc(p, q, args.budget, args.seed)
        _note("js: Monte Carlo estimate, experimental")
        return {"kind": "js", "value": est, "stderr": se, "experimental": True}

    if args.kind == "kl":
        value = dr.kl_divergence(p, q)
        if p.k == 2:
            est, bound = dr.oracle_kl(p, q)
            oracle = {"method": "quadrature", "estimate": est, "error_bound": bound}
        else:
            oracle = None
    else:
        gamma = 2.0 if args.kind == "cs" else args.gamma
        h = dr.HolderExponent(gamma)
        value = dr.holder_divergence(p, q, h)
        method = args.oracle_method or ("quadrature" if p.k <= 3 else "mc")
        est, err = dr.oracle_holder(p, q, h, method, args.budget, args.seed)
        # MC: three standard errors
        bound = err if method == "quadrature" else 3.0 * err
        oracle = {"method": method, "estimate": est, "error_bound": bound}
        if method == "mc":
            oracle["stderr"] = err

    out = {"kind": args.kind, "value": value, "oracle": oracle}
    if args.kind in ("holder", "cs"):
        out["gamma"] = 2.0 if args.kind == "cs" else args.gamma
    if oracle is not None:
        oracle["abs_diff"] = abs(value - oracle["estimate"])
        out["agrees"] = bool(oracle["abs_diff"] <= oracle["error_bound"])
    if args.validate:
        if oracle is None:
            raise RuntimeError(f"no independent oracle for kind={args.kind} with K={p.k}")
        if not out["agrees"]:
            raise ValidationError(out)
    return out


class ValidationError(RuntimeError):
    def __init__(self, payload):
        super().__init__(
            f"closed form {payload['value']!r} disagrees with oracle "
            f"{payload['oracle']['estimate']!r} beyond bound {payload['oracle']['error_bound']!r}"
        )
        self.payload = payload


def cmd_fuse(args):
    with open(args.opinions, encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw.get("opinions")
    if not isinstance(raw, list):
        raise UsageError("opinions file must hold a list of opinions or {\"opinions\": [...]}")
    ops = [Opinion.from_json(o) for o in raw]
    return combine_all(ops).to_json()


def cmd_sweep_gamma(args):
    cfg = _experiment_config(args)
    grid = args.grid if args.grid is not None else list(GAMMA_GRID)
    for g in grid:
        if not g > 1.0:
            raise UsageError(f"gamma grid values must be > 1, got {g}")
    return sweep_gamma(cfg, grid)


def cmd_sweep_noise(args):
    cfg = _experiment_config(args)
    variances = args.variances if args.variances is not None else list(NOISE_VARIANCES)
    return sweep_noise(cfg, variances, args.view, args.repeats)


def cmd_ablation(args):
    cfg = _experiment_config(args)
    return divergence_ablation(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hdmvl", description=__doc__.splitlines()[0])
    parser.add_argument("--json-errors", action="store_true",
                        help='on failure also print {"error": kind, "detail": msg} to stdout')
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="write the synthetic fixture as CSV + manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--samples-per-class", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train and write a checkpoint")
    _add_experiment_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    _add_experiment_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", choices=["test", "train"], default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("divergence", help="divergence between two Dirichlets")
    p.add_argument("--kind", choices=["holder", "kl", "cs", "js"], default="holder")
    p.add_argument("--gamma", type=float, default=1.7)
    p.add_argument("--p", type=_floats)
    p.add_argument("--q", type=_floats)
    p.add_argument("--p-file")
    p.add_argument("--q-file")
    p.add_argument("--oracle-method", choices=["quadrature", "mc"])
    p.add_argument("--budget", type=int, default=1_000_000, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--validate", action="store_true", help="exit 1 if the oracle disagrees")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("fuse", help="combine opinions from a JSON file")
    p.add_argument("--opinions", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("sweep-gamma", help="fused accuracy over a Hölder exponent grid")
    _add_experiment_flags(p)
    p.add_argument("--grid", type=_floats)
    p.set_defaults(func=cmd_sweep_gamma)

    p = sub.add_parser("sweep-noise", help="Gaussian noise robustness sweep on one view")
    _add_experiment_flags(p)
    p.add_argument("--variances", type=_floats)
    p.add_argument("--view", type=int, default=1)
    p.add_argument("--repeats", type=int, default=4)
    p.set_defaults(func=cmd_sweep_noise)

    p = sub.add_parser("ablation", help="train with KL, CS and Hölder regularizers")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_ablation)
    return parser


def _fail(args_json: bool, kind: str, detail: str, code: int, payload=None) -> int:
    print(f"error: {detail}", file=sys.stderr)
    if args_json:
        err = {"error": kind, "detail": detail}
        if payload is not None:
            err["result"] = payload
        print(json.dumps(err, sort_keys=True))
    return code


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    json_errors = "--json-errors" in argv
    try:
        args = build_parser().parse_args(argv)
        result = args.func(args)
    except UsageError as exc:
        return _fail(json_errors, "usage", str(exc), 2)
    except ValidationError as exc:
        return _fail(json_errors, "validation", str(exc), 1, exc.payload)
    except (ValueError, ArithmeticError, RuntimeError, OSError, KeyError) as exc:
        return _fail(json_errors, type(exc).__name__, str(exc), 1)
    print(json.dumps(result, sort_keys=True, allow_nan=False))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
