"""Independent numerical references shared by the test modules."""
import numpy as np


def grid_conjugate(y, lam, h=2e-4):
    """sup_x <y, x> - 1/2 ||x||^2 - lam ||x||_1, coordinate by coordinate on a grid.

    The objective separates, so each coordinate is a 1-D sup over a grid
    wide enough to contain the maximizer; the result is then polished by
    a parabola through the best grid point and its neighbours.
    """
    total = 0.0
    for v in np.ravel(y):
        n = int(np.ceil((abs(v) + 1.0) / h))
        grid = h * np.arange(-n, n + 1)  # contains 0 exactly
        vals = v * grid - 0.5 * grid**2 - lam * np.abs(grid)
        m = int(np.argmax(vals))
        best = vals[m]
        # the objective is smooth away from the kink at 0
        if 0 < m < grid.size - 1 and m != n:
            f0, f1, f2 = vals[m - 1 : m + 2]
            denom = f0 - 2 * f1 + f2
            if denom < 0:
                best = max(best, f1 - (f2 - f0) ** 2 / (8 * denom))
        total += best
    return total
