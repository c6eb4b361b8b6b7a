"""Growth of the discrete A_p constant of w(n) = (n+1)^a under doubling of N."""
import argparse
from dataclasses import dataclass

from ultraharmonic import harmonic_tools as ht


@dataclass
class GrowthConfig:
    p: float = 2.0
    exponents: tuple = (0.0, 0.5, 0.9, 1.0)
    sizes: tuple = (256, 512, 1024, 2048, 4096, 8192)


def main(cfg: GrowthConfig):
    for a in cfg.exponents:
        w = ht.power_weight(a, cfg.sizes[-1])
        vals = [ht.ap_constant(w, cfg.p, N) for N in cfg.sizes]
        steps = "  ".join(f"{b / c - 1:+.4f}" for c, b in zip(vals, vals[1:]))
        print(f"a={a:<4} A_p(N={cfg.sizes[-1]}) = {vals[-1]:.5f}  growth per doubling: {steps}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=2.0)
    main(GrowthConfig(p=ap.parse_args().p))
