"""Gauss quadrature rules on the reference triangle.

Rules are stored as barycentric coordinates with weights normalized to sum
to one, so the physical-triangle weights are ``w * area``.  For piecewise
linear elements the nodal basis values at the quadrature points are the
barycentric coordinates themselves.
"""
import numpy as np


def _perms3(a, b, c):
    return [(a, b, c), (b, c, a), (c, a, b)]


# degree of polynomial exactness -> (barycentric points (Q,3), weights (Q,))
_RULES = {
    1: (
        np.array([[1 / 3, 1 / 3, 1 / 3]]),
        np.array([1.0]),
    ),
    2: (
        np.array(_perms3(2 / 3, 1 / 6, 1 / 6)),
        np.full(3, 1 / 3),
    ),
    4: (
        np.array(
            _perms3(0.108103018168070, 0.445948490915965, 0.445948490915965)
            + _perms3(0.816847572980459, 0.091576213509771, 0.091576213509771)
        ),
        np.array([0.223381589678011] * 3 + [0.109951743655322] * 3),
    ),
    5: (
        np.array(
            [[1 / 3, 1 / 3, 1 / 3]]
            + _perms3(0.059715871789770, 0.470142064105115, 0.470142064105115)
            + _perms3(0.797426985353087, 0.101286507323456, 0.101286507323456)
        ),
        np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3),
    ),
}


def triangle_rule(order):
    """Return (barycentric points, weights) exact for polynomials of `order`.

    Supported orders are 1 through 5; an order with no dedicated table is
    served by the next stronger rule.
    """
    if not 1 <= order <= 5:
        raise ValueError(f"quadrature order must be in 1..5, got {order}")
    key = min(k for k in _RULES if k >= order)
    return _RULES[key]
