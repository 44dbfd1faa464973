"""Stratified bundles on affine spaces over prime fields.

Modules: ``arith`` (F_p, polynomials, Lucas binomials), ``diffop`` (divided-power
operators), ``connection`` (connections, p-curvature, Cartier descent),
``tower`` (Frobenius towers and truncated horizontal sections), ``gaussmanin``
(relative theory over a line) and ``cli`` (the ``strat`` command).
"""

__version__ = "0.1.0"
