"""Convergence of the chart-wise Gauss-Legendre quadrature on the round sphere.

Integrates the area form and z^2 dA at increasing node counts and prints the errors
against 4 pi and 4 pi / 3.
"""

import numpy as np

from cartan_kit import manifold as M


def area_density(p):
    return 4.0 / (1.0 + p.coords @ p.coords) ** 2


def z2_density(p):
    return area_density(p) * M.sphere_embed(p)[2] ** 2


if __name__ == "__main__":
    sphere = M.sphere2()
    print(f"{'nodes':>6s} {'area error':>12s} {'z^2 error':>12s}")
    for n in (8, 16, 32, 64, 128):
        area = z2 = 0.0
        for i in range(len(sphere.charts)):
            for p, w in M._weighted_nodes(sphere, i, n):
                area += w * area_density(p)
                z2 += w * z2_density(p)
        print(f"{n:6d} {abs(area - 4 * np.pi):12.3e} {abs(z2 - 4 * np.pi / 3):12.3e}")
