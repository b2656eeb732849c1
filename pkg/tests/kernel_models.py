"""Synthetic Landweber-filtered models for the kernel-vanishing check.

Each entry is (p, heights, weights, A, q, connecting) where connecting maps
(src, tgt) to a list of (u-exponent, coefficient text).  Entries are
homogeneous of the Euler class degree 2 * len(weights): v_j^a u^k with
k = len(weights) + a (p^j - 1).
"""

from __future__ import annotations

from fgl_forge.bounds import FilteredModuleModel, LandweberFiltration, bound_B, euler_over_bp
from fgl_forge.euler import EulerClass, LineBundleWeights
from fgl_forge.ringcore import parse_coef
from fgl_forge.series import USeries

MODELS = [
    (2, (1,), (1,), 3, 1, {}),
    (2, (2,), (1,), 4, 1, {}),
    (2, (1, 2), (1,), 4, 2, {(0, 1): [(4, "v2")]}),
    (2, (1, 1), (1,), 3, 2, {(0, 1): [(2, "v1")]}),
    (2, (1, 2), (3,), 4, 2, {(0, 1): [(4, "v2")]}),
    (2, (1,), (2,), 3, 1, {}),
    (2, (1, 1), (1, 1), 3, 2, {(0, 1): [(3, "v1")]}),
    (2, (2, 2), (1,), 3, 2, {(0, 1): [(4, "v2")]}),
    (2, (1, 2, 2), (1,), 3, 3, {(0, 1): [(4, "v2")], (1, 2): [(4, "v2")], (0, 2): [(8, "v3")]}),
    (2, (1, 1, 2), (1,), 3, 3, {(0, 1): [(2, "v1")], (1, 2): [(4, "v2")]}),
    (3, (1,), (1,), 3, 1, {}),
    (3, (1, 2), (1,), 6, 2, {(0, 1): [(9, "v2")]}),
    (3, (1, 1), (1,), 3, 2, {(0, 1): [(3, "v1")]}),
    (3, (2,), (1,), 4, 1, {}),
    (3, (1,), (3,), 3, 1, {}),
    (3, (1, 1), (2,), 3, 2, {(0, 1): [(3, "v1")]}),
    (3, (1, 1), (1, 2), 3, 2, {(0, 1): [(4, "v1")]}),
    (2, (1, 1), (-1,), 3, 2, {(0, 1): [(2, "v1")]}),
    (2, (1, 2), (1,), 3, 2, {(0, 1): [(2, "v1")]}),
    (3, (1, 1, 1), (1,), 3, 3, {(0, 1): [(3, "v1")], (1, 2): [(3, "2*v1")]}),
]


def build(model):
    """(Euler class, filtered model, A, q) with the Euler class truncated at A + qB."""
    p, heights, weights, A, q, conn = model
    filt = LandweberFiltration(heights)
    B = bound_B(LineBundleWeights(weights, p).exponents(), filt, p)
    W = A + q * B
    e = euler_over_bp(weights, p, W)
    bp = e.series.spec
    entries = {key: USeries.from_terms(bp, W, {k: parse_coef(bp, c) for k, c in terms})
               for key, terms in conn.items()}
    return e, FilteredModuleModel(p, filt, entries), A, q


def corrupt(e: EulerClass, A: int) -> EulerClass:
    """Pi with every coefficient below u^{W - A + 1} removed: u^{A-1} then lies in the kernel."""
    s = e.series
    W = s.trunc
    cut = W - A + 1
    coeffs = [s.spec.zero()] * cut + s.coeffs[cut:]
    return EulerClass(USeries(s.spec, W, coeffs), e.source, e.law)
