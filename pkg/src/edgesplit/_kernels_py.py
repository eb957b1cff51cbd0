"""Pure-Python kernels: fallback twins of the compiled extension.

Every function here mirrors edgesplit._kernels operation-for-operation
(same summation order, same guards) so results agree across backends.
"""

from math import exp, isfinite


def rect_energy(t, p):
    """Left-rectangle integral: sum of p[i] * (t[i+1] - t[i])."""
    total = 0.0
    for i in range(len(t) - 1):
        total += p[i] * (t[i + 1] - t[i])
    return total


def first_nonincreasing(t):
    """Index of the first timestamp not strictly greater than its
    predecessor, or -1 when the sequence is strictly increasing."""
    for i in range(1, len(t)):
        if t[i] <= t[i - 1]:
            return i
    return -1


def first_negative(p):
    """Index of the first negative value, or -1 when all are >= 0."""
    for i in range(len(p)):
        if p[i] < 0.0:
            return i
    return -1


def quad_design_sums(x, y):
    """Moment sums for the 3x3 least-squares normal equations of
    a*x^2 + b*x + c: returns (sx1, sx2, sx3, sx4, sy, sxy, sx2y)."""
    s1 = s2 = s3 = s4 = t0 = t1 = t2 = 0.0
    for i in range(len(x)):
        xi = x[i]
        yi = y[i]
        xx = xi * xi
        s1 += xi
        s2 += xx
        s3 += xx * xi
        s4 += xx * xx
        t0 += yi
        t1 += xi * yi
        t2 += xx * yi
    return s1, s2, s3, s4, t0, t1, t2


def quad_sse(x, y, a, b, c):
    """Sum of squared residuals of y against a*x^2 + b*x + c."""
    sse = 0.0
    for i in range(len(x)):
        xi = x[i]
        d = y[i] - (a * xi * xi + b * xi + c)
        sse += d * d
    return sse


def exp_solve_at_rate(x, y, rate):
    """Best (amp, floor) of floor + amp*exp(-rate*x) for a fixed rate.

    Closed-form 2x2 least squares in the basis [exp(-rate*x), 1].
    Returns (amp, floor, sse); collapses to the flat fit (amp=0) when the
    basis is numerically degenerate at this rate.
    """
    n = len(x)
    se = see = sy = sye = 0.0
    for i in range(n):
        e = exp(-rate * x[i])
        yi = y[i]
        se += e
        see += e * e
        sy += yi
        sye += yi * e
    det = n * see - se * se
    if not (det > 0.0) or not isfinite(det) or det < n * see * 1e-15:
        mean = sy / n
        sse = 0.0
        for i in range(n):
            d = y[i] - mean
            sse += d * d
        return 0.0, mean, sse
    amp = (n * sye - se * sy) / det
    floor = (sy * see - se * sye) / det
    sse = 0.0
    for i in range(n):
        d = y[i] - (floor + amp * exp(-rate * x[i]))
        sse += d * d
    return amp, floor, sse


def spin(iterations):
    """CPU-bound busy loop; the arithmetic keeps the loop un-foldable."""
    acc = 0.0
    for _ in range(iterations):
        acc = (acc + 1.1) * 0.731
    return acc
