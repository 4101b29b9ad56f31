"""Experiment configuration and the desk-scale sweeps (noise, Hölder exponent,
divergence ablation) shared by the CLI, scripts and acceptance tests."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import MultiViewDataset, complementary_spec, generate_synthetic, inject_noise, load_manifest, split
from .network import MlpConfig
from .trainer import TrainConfig, default_architecture, evaluate, train

NOISE_VARIANCES = (0.0, 0.01, 0.02, 0.05)
GAMMA_GRID = (1.2, 1.5, 1.7, 1.9, 2.0)


@dataclass
class ExperimentConfig:
    """Flat experiment settings; keys double as CLI flag names."""

    manifest: str | None = None  # None: complementary synthetic fixture
    samples_per_class: int = 100
    data_seed: int = 0
    test_fraction: float = 0.3
    split_seed: int = 0
    hidden: tuple[int, ...] = (16,)
    pseudo_hidden: tuple[int, ...] = (16,)
    train: TrainConfig = field(default_factory=TrainConfig)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        own = {f.name for f in dataclasses.fields(cls)} - {"train"}
        tc = {f.name for f in dataclasses.fields(TrainConfig)}
        unknown = set(d) - own - tc
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: v for k, v in d.items() if k in own}
        for key in ("hidden", "pseudo_hidden"):
            if key in kw:
                kw[key] = tuple(int(h) for h in kw[key])
        return cls(**kw, train=TrainConfig(**{k: v for k, v in d.items() if k in tc}))

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "train"}
        out.update(dataclasses.asdict(self.train))
        out["hidden"] = list(self.hidden)
        out["pseudo_hidden"] = list(self.pseudo_hidden)
        return out


def load_dataset(cfg: ExperimentConfig) -> MultiViewDataset:
    if cfg.manifest:
        return load_manifest(cfg.manifest)
    return generate_synthetic(complementary_spec(cfg.samples_per_class, cfg.data_seed))


def split_dataset(cfg: ExperimentConfig, ds: MultiViewDataset | None = None):
    ds = load_dataset(cfg) if ds is None else ds
    return split(ds, cfg.test_fraction, cfg.split_seed)


def architecture(cfg: ExperimentConfig, ds: MultiViewDataset) -> list[MlpConfig]:
    return default_architecture(ds, cfg.hidden, cfg.train.seed)


def fit(cfg: ExperimentConfig, train_ds: MultiViewDataset):
    return train(train_ds, architecture(cfg, train_ds), cfg.train, cfg.pseudo_hidden)


def sweep_gamma(cfg: ExperimentConfig, grid: Sequence[float] = GAMMA_GRID) -> list[dict]:
    """Train once per Hölder exponent; fused test accuracy per exponent."""
    tr, te = split_dataset(cfg)
    out = []
    for g in grid:
        tcfg = dataclasses.replace(cfg.train, divergence="holder", gamma=float(g))
        run = dataclasses.replace(cfg, train=tcfg)
        model, history = fit(run, tr)
        m = evaluate(model, te)
        out.append({
            "gamma": float(g),
            "fused_accuracy": m.fused_accuracy,
            "mean_uncertainty": m.mean_uncertainty,
            "per_view_accuracy": m.per_view_accuracy,
            "first_epoch_loss": history[0].total,
            "final_epoch_loss": history[-1].total,
            "converged": history[-1].total < history[0].total,
        })
    return out


def sweep_noise(cfg: ExperimentConfig, variances: Sequence[float] = NOISE_VARIANCES,
                view: int = 1, repeats: int = 4) -> list[dict]:
    """Gaussian noise of each variance on one view of both splits, then train
    and evaluate; results are means over ``repeats`` seeded runs.

    Run ``r`` uses the same training seed and noise draws at every variance
    (only the scale changes), so the levels are compared on common random
    numbers.
    """
    tr, te = split_dataset(cfg)
    out = []
    for var in variances:
        if var < 0:
            raise ValueError("noise variance must be >= 0")
        sigma = float(np.sqrt(var))
        accs, us, views = [], [], []
        for r in range(repeats):
            seed = cfg.train.seed + r
            run = dataclasses.replace(cfg, train=dataclasses.replace(cfg.train, seed=seed))
            ntr = inject_noise(tr, view, sigma, 10_000 + seed)
            nte = inject_noise(te, view, sigma, 20_000 + seed)
            model, _ = fit(run, ntr)
            m = evaluate(model, nte)
            accs.append(m.fused_accuracy)
            us.append(m.mean_uncertainty)
            views.append(m.per_view_accuracy)
        out.append({
            "variance": float(var),
            "view": view,
            "fused_accuracy": float(np.mean(accs)),
            "mean_uncertainty": float(np.mean(us)),
            "per_view_accuracy": np.mean(views, axis=0).tolist(),
            "runs": repeats,
        })
    return out


def divergence_ablation(cfg: ExperimentConfig, kinds: Sequence[str] = ("kl", "cs", "holder")) -> list[dict]:
    """Same data and seeds, one training run per regularizer."""
    tr, te = split_dataset(cfg)
    out = []
    for name in kinds:
        run = dataclasses.replace(cfg, train=dataclasses.replace(cfg.train, divergence=name))
        model, history = fit(run, tr)
        m = evaluate(model, te)
        out.append({
            "divergence": name if name != "holder" else f"holder({cfg.train.gamma:g})",
            "fused_accuracy": m.fused_accuracy,
            "per_view_accuracy": m.per_view_accuracy,
            "pseudo_accuracy": m.pseudo_accuracy,
            "mean_uncertainty": m.mean_uncertainty,
            "final_epoch_loss": history[-1].total,
        })
    return out
