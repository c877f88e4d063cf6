"""Independent reference computations for the shift, in plain Fractions.

Nothing here imports the package's geometry: points are dicts of Fractions
with a fill value, boxes are evaluated coordinate by coordinate over a wide
window, and everything outside the window is bounded by its weight.
"""

from fractions import Fraction

SCAN = 96


def coord(point, i):
    support, fill = point
    return support.get(i, fill)


def dist(x, y, scan=SCAN):
    return max(abs(coord(x, i) - coord(y, i)) / 2 ** abs(i) for i in range(-scan, scan + 1))


def ball_image_interval(x, r, j, i):
    """Coordinate i of sigma^j(B(x, r)) is coordinate i+j of the ball."""
    c = coord(x, i + j)
    rad = r * 2 ** abs(i + j)
    return max(c - rad, Fraction(0)), min(c + rad, Fraction(1))


def ball_image_diam(x, r, j, scan=SCAN):
    best = Fraction(0)
    for i in range(-scan, scan + 1):
        lo, hi = ball_image_interval(x, r, j, i)
        best = max(best, (hi - lo) / 2 ** abs(i))
    # every coordinate beyond the scan has weighted length below this
    assert Fraction(1, 2 ** scan) < best or best == 0
    return best


def n1(x, r, threshold, budget=200):
    for j in range(budget + 1):
        if ball_image_diam(x, r, j) > threshold:
            return j
    return None


def fu_box_diam(x, k, eps, shift=0, scan=SCAN):
    """Diameter of sigma^shift of the box prod [x_i +- eps 2^(i-k)] & [0, 1]."""
    best = Fraction(0)
    for i in range(-scan, scan + 1):
        src = i + shift
        c = coord(x, src)
        rad = eps * Fraction(2) ** (src - k)
        lo, hi = max(c - rad, Fraction(0)), min(c + rad, Fraction(1))
        best = max(best, (hi - lo) / 2 ** abs(i))
    return best


def bowen(x, y, n, scan=SCAN):
    return max(dist(({i - t: v for i, v in x[0].items()}, x[1]),
                    ({i - t: v for i, v in y[0].items()}, y[1]), scan) for t in range(n + 1))


def from_point(p):
    """Convert a package HilbertPoint into the oracle's (dict, fill) form."""
    return ({i: v.to_fraction() for i, v in p.support.items()}, p.fill.to_fraction())
