"""Is the Strawderman posterior mean E(lam | x) monotone in |x|? Prints the
sign pattern of its successive differences over a wide |x| grid."""

import numpy as np

from shrinkconf.shrinkers import strawderman_shrink_factor


def main():
    r = np.concatenate([np.linspace(0, 10, 401), np.geomspace(10, 1e3, 200)[1:]])
    t = r * r
    for p in (1, 3, 5, 10, 30):
        for a in (0.0, 0.5, 0.9):
            e = strawderman_shrink_factor(t, p, a)
            d = np.diff(e)
            trend = "decreasing" if np.all(d < 0) else "increasing" if np.all(d > 0) else "mixed"
            print(f"p={p:2d} a={a:.1f}  E(lam|x=0)={e[0]:.5f}  E(lam||x|=1e3)={e[-1]:.3e}  {trend}")


if __name__ == "__main__":
    main()
