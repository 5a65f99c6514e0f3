import math

import numpy as np


def ripple_peak_to_peak(theta0, f, points=2049):
    """Peak-to-peak of f over [theta0, theta0 + pi] after removing the chord between the end points.

    For a + b theta - c sin(2 theta) with theta0 a multiple of pi/2 the chord
    is exactly the secular part, so the result is 2c.
    """
    th = np.linspace(theta0, theta0 + math.pi, points)
    y = np.asarray(f(th), dtype=float)
    chord = y[0] + (y[-1] - y[0]) * (th - th[0]) / math.pi
    r = y - chord
    return float(r.max() - r.min())
