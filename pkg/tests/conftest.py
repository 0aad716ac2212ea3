import numpy as np
import pytest

from gpsim import Params

# The four parameter corners exercised throughout: a stable spiral, a stable
# node, the dominant-reservoir-loss node, and the vanishing-condensate case.
SPIRAL = dict(g=1.0, lam=1.0, R=1.0, P=100.0, alpha=10.0, beta=0.1)
NODE = dict(g=1.0, lam=1.0, R=1.0, P=10.0, alpha=0.5, beta=0.1)
BIG_BETA = dict(g=1.0, lam=1.0, R=1.0, P=12.0, alpha=0.1, beta=100.0)
VANISH = dict(g=1.0, lam=1.0, R=1.0, P=1.0, alpha=10.0, beta=10.0)


@pytest.fixture
def spiral_params():
    return Params(**SPIRAL)


@pytest.fixture
def node_params():
    return Params(**NODE)


@pytest.fixture
def vanish_params():
    return Params(**VANISH)


def random_params(rng, require=None, max_tries=1000):
    """Draw a log-uniform valid parameter set, optionally constrained to a
    delta sign ('positive'/'negative') away from the non-hyperbolic boundary."""
    for _ in range(max_tries):
        g, lam, R, P, alpha, beta = np.exp(rng.uniform(np.log(0.05), np.log(20.0), 6))
        p = Params(g=g, lam=lam, R=R, P=P, alpha=alpha, beta=beta)
        rel = abs(p.delta) / max(p.P * p.R, p.alpha * p.beta)
        if rel < 0.05:
            continue
        if require == "positive" and p.delta <= 0:
            continue
        if require == "negative" and p.delta >= 0:
            continue
        return p
    raise RuntimeError("could not draw parameters")


def fit_slope(xs, errors):
    return float(np.polyfit(np.log(np.asarray(xs, float)),
                            np.log(np.asarray(errors, float)), 1)[0])


def segment_self_crossings(xs, ys):
    """Count proper intersections between non-adjacent segments of a polyline."""
    P = np.column_stack([np.asarray(xs, float), np.asarray(ys, float)])
    n = len(P) - 1
    count = 0
    for i in range(n):
        a, b = P[i], P[i + 1]
        j = np.arange(i + 2, n)
        if len(j) == 0:
            continue
        c, d = P[j], P[j + 1]
        ab = b - a
        d1 = ab[0] * (c[:, 1] - a[1]) - ab[1] * (c[:, 0] - a[0])
        d2 = ab[0] * (d[:, 1] - a[1]) - ab[1] * (d[:, 0] - a[0])
        cd = d - c
        d3 = cd[:, 0] * (a[1] - c[:, 1]) - cd[:, 1] * (a[0] - c[:, 0])
        d4 = cd[:, 0] * (b[1] - c[:, 1]) - cd[:, 1] * (b[0] - c[:, 0])
        count += int(np.sum((d1 * d2 < 0) & (d3 * d4 < 0)))
    return count
