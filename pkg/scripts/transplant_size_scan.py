"""Size constant max |K(n,m)| |n-m| of even transplant kernels as N doubles,
for order pairs inside and outside the band (mu-1)/2 < lam < mu."""
import argparse
from dataclasses import dataclass

from ultraharmonic import harmonic_tools as ht
from ultraharmonic import transplant as tp


@dataclass
class ScanConfig:
    pairs: tuple = ((1.2, 2.0), (0.8, 1.4), (0.3, 2.0), (0.4, 3.0), (2.5, 2.0))
    sizes: tuple = (128, 256, 512, 1024, 2048)


def in_band(lam, mu):
    return (mu - 1) / 2 < lam < mu


def main(cfg: ScanConfig):
    print("lam   mu    band  " + "  ".join(f"N={N:<6}" for N in cfg.sizes))
    for lam, mu in cfg.pairs:
        vals = [ht.size_constant(tp.build_kernel_matrix(lam, mu, N, "even").as_kernel_matrix())
                for N in cfg.sizes]
        print(f"{lam:<5} {mu:<5} {'yes' if in_band(lam, mu) else 'no ':<5} "
              + "  ".join(f"{v:<8.4g}" for v in vals))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=list(ScanConfig.sizes))
    main(ScanConfig(sizes=tuple(ap.parse_args().sizes)))
