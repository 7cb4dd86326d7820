import pytest

from tautring import Evaluator, RingContext, pairing_matrix

_MATRICES = {}


def get_matrices(g, n):
    """Context, evaluator and all pairing matrices for (g, n), built once."""
    if (g, n) not in _MATRICES:
        ctx = RingContext(g, n)
        ev = Evaluator(ctx)
        ms = [pairing_matrix(ctx, k, ev) for k in range(ctx.top_degree + 1)]
        _MATRICES[(g, n)] = (ctx, ev, ms)
    return _MATRICES[(g, n)]


@pytest.fixture
def ctx22():
    return RingContext(2, 2)


@pytest.fixture
def ctx23():
    return RingContext(2, 3)


@pytest.fixture
def ctx33():
    return RingContext(3, 3)
