"""Random network synthesis for the generate and experiment commands."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .graph import KINDS, generate, to_adjacency
from .model import NetworkSpec, make_spec

# entries live on dyadic grids so that generated files are exactly specified
GRID = 32
NOISE_GRID = 2**16
HETERO_MODES = ("none", "perturb", "resample")


@dataclass(frozen=True)
class Heterogeneity:
    mode: str = "none"
    eps: float = 0.0

    def __str__(self):
        if self.mode == "perturb" and self.eps > 0:
            return f"perturb({self.eps:g})"
        return "none" if self.mode == "perturb" else self.mode


def parse_hetero(text: str) -> Heterogeneity:
    """Accepts ``none``, ``resample``, ``perturb(eps)`` or ``perturb:eps``."""
    t = text.strip().lower()
    if t in ("none", "resample"):
        return Heterogeneity(t)
    m = re.fullmatch(r"perturb(?:\((.+)\)|:(.+))", t)
    if not m:
        raise ValueError(f"heterogeneity must be none, resample or perturb(eps), got {text!r}")
    raw = m.group(1) or m.group(2)
    try:
        eps = float(raw)
    except ValueError:
        raise ValueError(f"perturbation size {raw!r} is not a number") from None
    if not np.isfinite(eps) or eps < 0:
        raise ValueError(f"perturbation size must be finite and nonnegative, got {raw}")
    return Heterogeneity("perturb", eps)


@dataclass(frozen=True)
class SynthConfig:
    kind: str = "chain"
    N: int = 3
    n: int = 2
    p: int = 1
    m: int = 1
    hetero: Heterogeneity = Heterogeneity()
    drivers: int = 1
    edge_prob: float = 0.5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown topology kind {self.kind!r}; choose from {', '.join(KINDS)}")
        for name in ("N", "n", "p", "m"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not 0 <= self.drivers <= self.N:
            raise ValueError(f"drivers must lie in 0..{self.N}, got {self.drivers}")
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {self.edge_prob}")


def _draw(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal entries rounded to multiples of ``1 / GRID``."""
    return np.round(rng.standard_normal(shape) * GRID) / GRID


def synthesize(cfg: SynthConfig, seed: int) -> NetworkSpec:
    """Deterministic in ``(cfg, seed)``; drivers are the lowest-index nodes.

    Draw order is fixed (topology, shared base, H, then per-node terms) so that
    ``perturb(0)`` reproduces ``none`` exactly.
    """
    topo_seed, dyn_seed = np.random.SeedSequence(seed).spawn(2)
    W = to_adjacency(generate(cfg.kind, cfg.N, seed=topo_seed, p=cfg.edge_prob))
    rng = np.random.default_rng(dyn_seed)
    A0 = _draw(rng, (cfg.n, cfg.n))
    B0 = _draw(rng, (cfg.n, cfg.p))
    C0 = _draw(rng, (cfg.m, cfg.n))
    H = _draw(rng, (cfg.n, cfg.m))
    As, Bs, Cs = [], [], []
    for _ in range(cfg.N):
        if cfg.hetero.mode == "resample":
            As.append(_draw(rng, (cfg.n, cfg.n)))
            Bs.append(_draw(rng, (cfg.n, cfg.p)))
            Cs.append(_draw(rng, (cfg.m, cfg.n)))
            continue
        A = A0
        if cfg.hetero.mode == "perturb":
            noise = np.round(rng.uniform(-cfg.hetero.eps, cfg.hetero.eps, (cfg.n, cfg.n)) * NOISE_GRID) / NOISE_GRID
            A = A0 + noise
        As.append(A)
        Bs.append(B0)
        Cs.append(C0)
    delta = np.zeros(cfg.N, dtype=int)
    delta[: cfg.drivers] = 1
    return make_spec(As, Bs, Cs, W, H, delta)
