"""||g f|| / ||f|| against its spectral limit as the output window n_out grows."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from ultraharmonic import harness as hs
from ultraharmonic import semigroup as sg


@dataclass
class RatioConfig:
    kind: str = "heat"
    k: int = 1
    lam: float = 0.6
    support: int = 32
    seed: int = 20240601
    n_outs: tuple = (256, 512, 1024, 2048, 4096)
    t_grid: str = "1e-8,1e8,10"


def main(cfg: RatioConfig):
    f = hs.random_sequence(cfg.seed, cfg.support)
    grid = sg.TimeGrid.parse(cfg.t_grid)
    target = math.sqrt(math.gamma(2 * cfg.k) / 4 ** cfg.k)
    for n in cfg.n_outs:
        g = sg.g_function(cfg.kind, cfg.lam, cfg.k, f, grid, n_out=n)
        r = np.linalg.norm(g)
        print(f"n_out={n:<5} ratio {r:.8f}  error {abs(r - target):.3e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", choices=["heat", "poisson"], default="heat")
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--lam", type=float, default=0.6)
    a = ap.parse_args()
    main(RatioConfig(a.kind, a.k, a.lam))
