"""Defect of the unit-step chain against the direct transplantation, by N."""
import argparse
from dataclasses import dataclass

import numpy as np

from ultraharmonic import harness as hs
from ultraharmonic import transplant as tp


@dataclass
class CompositionConfig:
    lam: float = 1.2
    mu: float = 3.0
    support: int = 8
    seed: int = 20240601
    sizes: tuple = (1024, 2048, 4096, 8192, 16384)


def main(cfg: CompositionConfig):
    f = hs.random_sequence(cfg.seed, cfg.support)
    prev = None
    for N in cfg.sizes:
        d = tp.composition_check(cfg.lam, cfg.mu, f, N)
        ratio = "" if prev is None else f"ratio {d / prev:.3f}"
        print(f"N={N:<6} defect {d:.4e}  {ratio}")
        prev = d
    logs = np.log([tp.composition_check(cfg.lam, cfg.mu, f, N) for N in cfg.sizes[-2:]])
    print(f"local exponent {(logs[1] - logs[0]) / np.log(cfg.sizes[-1] / cfg.sizes[-2]):.3f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=CompositionConfig.lam)
    ap.add_argument("--mu", type=float, default=CompositionConfig.mu)
    ap.add_argument("--seed", type=int, default=CompositionConfig.seed)
    a = ap.parse_args()
    main(CompositionConfig(a.lam, a.mu, seed=a.seed))
