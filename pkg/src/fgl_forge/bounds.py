"""Effective bounds for Euler classes acting on filtered BP-modules.

Mod I_h the p-series factors as [p](u) = u^{p^h} pi_h(u), and iterating gives
[p^a](u) = u^{p^{ah}} prod_j pi_h[j]^{p^{(a-1-j)h}} with pi_h[j] = pi_h([p^j](u)).
Over a module with slices BP*/I_{n_j}, an Euler class e = Pi - e_+ with
e_+^q = 0 satisfies e * sum_i Pi^{q-i} e_+^{i-1} = Pi^q, which bounds the
u-adic window needed to see that multiplication by e is injective.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .euler import EulerClass, LineBundleWeights, euler_of_weights
from .fgl import FormalGroupLaw, build_law, l_series
from .linalg import kernel_mod_pk
from .ringcore import CoefElem, Kind, RingSpec, reduce_coef
from .series import TruncationError, USeries, compose_precision, series_compose

__all__ = [
    "LandweberFiltration",
    "FilteredModuleModel",
    "UpowersCertificate",
    "KernelCertificate",
    "height_estimate_warnings",
    "pseries_mod_I",
    "pi_series",
    "verify_upowers",
    "bound_B",
    "lens_bound",
    "choose_height",
    "bp_spec_for",
    "kernel_vanishing_check",
]


@dataclass(frozen=True)
class LandweberFiltration:
    """Slice heights n_j: the j-th slice is BP*/I_{n_j}."""

    heights: tuple[int, ...]

    def __post_init__(self):
        hs = tuple(int(h) for h in self.heights)
        if any(h < 0 for h in hs):
            raise ValueError("slice heights must be non-negative")
        object.__setattr__(self, "heights", hs)

    @property
    def t(self) -> int:
        return len(self.heights)


def height_estimate_warnings(filt: LandweberFiltration, p: int, q: int) -> list[str]:
    """Flag heights above ceil(log_p q); advisory only."""
    if q < 2:
        return []
    cap = math.ceil(math.log(q, p) - 1e-12)
    msgs = [f"slice {j} has height {h} > ceil(log_{p} {q}) = {cap}"
            for j, h in enumerate(filt.heights) if h > cap]
    for m in msgs:
        warnings.warn(m, stacklevel=2)
    return msgs


def bound_B(weight_exponents, filt: LandweberFiltration, p: int) -> int:
    """B = sum over weights w and slices j of p^{n_j w}."""
    return sum(p ** (n * w) for w in weight_exponents for n in filt.heights)


def lens_bound(q: int, s: int, filt: LandweberFiltration, p: int) -> tuple[int, int]:
    """(C, r_min) with C = sum_j p^{s n_j} and r_min = q(q-1)C."""
    C = sum(p ** (s * n) for n in filt.heights)
    return C, q * (q - 1) * C


def choose_height(m: int, p: int) -> int:
    """Least n >= 1 with |v_n| = 2(p^n - 1) > m + 1."""
    if m < 0:
        raise ValueError("m must be non-negative")
    n = 1
    while 2 * (p**n - 1) <= m + 1:
        n += 1
    return n


# -- pi-series and the [p^a] factorization ---------------------------------------

def _quotient_spec(p: int, h: int, M: int) -> RingSpec:
    top = h
    while p ** (top + 1) < M:
        top += 1
    return RingSpec(Kind.BP_MOD_I, p, top, first=h)


def pseries_mod_I(p: int, h: int, M: int) -> USeries:
    """[p](u) over BP*/I_h mod u^M."""
    if h < 1:
        raise ValueError("height must be at least 1")
    law = build_law(_quotient_spec(p, h, M), max(M, 2))
    return l_series(law, p)


def _widen(s: USeries, spec: RingSpec) -> USeries:
    if s.spec == spec:
        return s
    return s.map_coefficients(lambda c: reduce_coef(c, spec), spec)


class _PTower:
    """[p](u) mod I_h at one precision, with the compositions built from it."""

    def __init__(self, p: int, h: int, M: int):
        self.p, self.h, self.M = p, h, M
        self.spec = _quotient_spec(p, h, M)
        self.law: FormalGroupLaw = build_law(self.spec, max(M, 2))
        self.P = l_series(self.law, p)

    def pi(self) -> USeries:
        return self.P.shift(-(self.p**self.h))

    def iterate(self, k: int, T: int) -> USeries:
        """[p^k](u) mod u^T as k-fold composition of [p](u)."""
        if k == 1:
            return self.P.truncate(T)
        V = self.p ** ((k - 1) * self.h)
        f_need, g_need = compose_precision(self.p**self.h, V, T)
        inner = self.iterate(k - 1, min(g_need, T))
        return series_compose(self.P.truncate(min(f_need, self.P.trunc)), inner, trunc=T)

    def pi_j(self, j: int, T: int) -> USeries:
        """pi_h[j] mod u^T."""
        pi = self.pi()
        if j == 0:
            return pi.truncate(T)
        g = self.iterate(j, T)
        V = self.p ** (j * self.h)
        f_need = min(-(-T // V), pi.trunc)
        return series_compose(pi.truncate(max(f_need, 1)), g, trunc=T)


def _iterate_precision(p: int, h: int, k: int, T: int) -> int:
    if k == 1:
        return T
    V = p ** ((k - 1) * h)
    f_need, g_need = compose_precision(p**h, V, T)
    return max(f_need, _iterate_precision(p, h, k - 1, min(g_need, T)))


def _pi_precision(p: int, h: int, j: int, T: int) -> int:
    if j == 0:
        return T + p**h
    V = p ** (j * h)
    return max(-(-T // V) + p**h, _iterate_precision(p, h, j, T))


def pi_series(p: int, h: int, j: int, T: int) -> USeries:
    """pi_h[j] = pi_h([p^j](u)) over BP*/I_h, mod u^T."""
    if h < 1 or j < 0 or T < 1:
        raise ValueError("need h >= 1, j >= 0, T >= 1")
    tower = _PTower(p, h, _pi_precision(p, h, j, T))
    return tower.pi_j(j, T)


@dataclass(frozen=True)
class UpowersCertificate:
    p: int
    h: int
    a: int
    trunc: int
    equal: bool
    first_mismatch: int | None
    lhs: USeries = field(repr=False)
    rhs: USeries = field(repr=False)
    working_precision: int = 0

    def to_json(self) -> dict:
        return {
            "p": self.p, "h": self.h, "a": self.a, "T": self.trunc,
            "equal": self.equal, "first_mismatch": self.first_mismatch,
            "working_precision": self.working_precision,
            "ring": self.lhs.spec.describe(),
        }


def verify_upowers(p: int, h: int, a: int, T: int) -> UpowersCertificate:
    """Check [p^a](u) = u^{p^{ah}} prod_{j<a} pi_h[j]^{p^{(a-1-j)h}} mod (I_h, u^T).

    The left side is the a-fold composite of [p](u); each stage only asks for
    the orders that influence the final truncation.
    """
    if a < 1:
        raise ValueError("a must be at least 1")
    lead = p ** (a * h)
    if T <= lead:
        raise TruncationError(f"T={T} does not exceed p^(ah) = {lead}; take T >= {lead + 1}")
    R = T - lead
    M = max(_iterate_precision(p, h, a, T), max(_pi_precision(p, h, j, R) for j in range(a)))
    tower = _PTower(p, h, M)
    lhs = tower.iterate(a, T)
    spec = tower.spec
    prod = USeries.one(spec, R)
    for j in range(a):
        prod = prod * (tower.pi_j(j, R) ** (p ** ((a - 1 - j) * h)))
    rhs = USeries._raw(spec, T, [spec.zero()] * lead + prod.coeffs)
    mismatch = next((k for k in range(T) if lhs.coeffs[k] != rhs.coeffs[k]), None)
    return UpowersCertificate(p, h, a, T, mismatch is None, mismatch, lhs, rhs, M)


# -- filtered module models and the kernel bound ---------------------------------

def bp_spec_for(p: int, trunc: int) -> RingSpec:
    """BP ring carrying every generator that can appear below u^trunc."""
    top = 1
    while p ** (top + 1) < trunc:
        top += 1
    return RingSpec(Kind.BP, p, top)


@dataclass
class FilteredModuleModel:
    """Slices BP*/I_{n_j}[[u]] joined by a nilpotent connecting part e_+.

    ``connecting`` maps (src, tgt) with src < tgt and n_src <= n_tgt to a
    series over BP, acting as multiplication from slice src into slice tgt.
    """

    p: int
    filtration: LandweberFiltration
    connecting: dict = field(default_factory=dict)

    def __post_init__(self):
        t = self.filtration.t
        hs = self.filtration.heights
        for (src, tgt), s in self.connecting.items():
            if not (0 <= src < t and 0 <= tgt < t):
                raise ValueError(f"connecting entry ({src}, {tgt}) names a missing slice")
            if tgt <= src:
                raise ValueError(f"connecting entry ({src}, {tgt}) is not strictly triangular")
            if hs[src] > hs[tgt]:
                raise ValueError(
                    f"entry ({src}, {tgt}) is not well defined: BP/I_{hs[src]} -> BP/I_{hs[tgt]}")
            if s.spec.kind is not Kind.BP or s.spec.p != self.p:
                raise ValueError("connecting series must be over a BP ring at the model's prime")

    def slice_spec(self, j: int, bp: RingSpec) -> RingSpec:
        return RingSpec(Kind.BP_MOD_I, bp.p, max(bp.n, self.filtration.heights[j]),
                        first=self.filtration.heights[j])


@dataclass(frozen=True)
class KernelCertificate:
    A: int
    q: int
    B: int
    window: int
    identity_holds: bool
    nilpotent_vanishes: bool
    kernel_vanishes_mod_uA: bool
    witness: dict | None
    degrees_checked: tuple[int, int]
    minimal_window: int | None
    field_note: str = "slices are F_p-vector spaces in each total degree"

    @property
    def passed(self) -> bool:
        return self.identity_holds and self.nilpotent_vanishes and self.kernel_vanishes_mod_uA

    def to_json(self) -> dict:
        return {
            "A": self.A, "q": self.q, "B": self.B, "window": self.window,
            "identity_holds": self.identity_holds,
            "nilpotent_vanishes": self.nilpotent_vanishes,
            "kernel_vanishes_mod_uA": self.kernel_vanishes_mod_uA,
            "witness": self.witness,
            "degrees_checked": list(self.degrees_checked),
            "empirical_minimal_window": self.minimal_window,
            "passed": self.passed,
        }


def _mat_mul(X, Y, t, spec, T):
    zero = USeries.zero(spec, T)
    out = {}
    for i in range(t):
        for j in range(t):
            acc = zero
            for k in range(t):
                if (i, k) in X and (k, j) in Y:
                    acc = acc + X[(i, k)] * Y[(k, j)]
            if not acc.is_zero():
                out[(i, j)] = acc
    return out


def _monomials(gens: list[int], p: int, m: int):
    """Exponent tuples e over gens with sum e_i (p^{g_i} - 1) = m."""
    if m == 0:
        yield (0,) * len(gens)
        return
    if not gens:
        return
    w = p ** gens[0] - 1
    for a in range(m // w, -1, -1):
        for rest in _monomials(gens[1:], p, m - a * w):
            yield (a,) + rest


def _prepare(e: EulerClass, model: FilteredModuleModel, W: int):
    bp = e.series.spec
    t = model.filtration.t
    Pi = e.series.truncate(W)
    N = {}
    for key, s in model.connecting.items():
        if s.trunc < W:
            raise TruncationError(f"connecting series {key} needs O(u^{W})")
        N[key] = _widen(s.truncate(W), bp)
    specs = [model.slice_spec(j, bp) for j in range(t)]
    return bp, t, Pi, N, specs


def _kernel_low_part(Pi, N, specs, p, W, A, D, deg_e):
    """Kernel of nu -> (Pi - N) nu mod u^W in total degree D, projected to u^{<A}."""
    t = len(specs)
    dom = []
    for j, sp in enumerate(specs):
        for k in range(W):
            m2 = 2 * k - D
            if m2 < 0 or m2 % 2:
                continue
            for mono in _monomials(list(sp.gens), p, m2 // 2):
                dom.append((j, k, mono))
    if not dom:
        return None
    rows: dict = {}
    cols = []
    red = {}

    def coef_in(spec, c):
        key = (spec, id(c))
        if key not in red:
            red[key] = (reduce_coef(c, spec), c)
        return red[key][0]

    for (j, k, mono) in dom:
        src = specs[j]
        col: dict = {}
        targets = [(j, Pi, 1)] + [(tgt, s, -1) for (sj, tgt), s in N.items() if sj == j]
        for tgt, s, sign in targets:
            tsp = specs[tgt]
            lifted = CoefElem(src, {mono: 1})
            try:
                nu = reduce_coef(lifted, tsp) if tsp != src else lifted
            except ValueError:
                continue
            if not nu.terms:
                continue
            for i in range(W - k):
                c = s.coeffs[i]
                if not c.terms:
                    continue
                prod = coef_in(tsp, c) * nu
                for ex, val in prod.terms.items():
                    key = (tgt, k + i, ex)
                    idx = rows.setdefault(key, len(rows))
                    col[idx] = (col.get(idx, 0) + sign * int(val)) % p
        cols.append(col)
    A_ = np.zeros((max(len(rows), 1), len(dom)), dtype=np.int64)
    for ci, col in enumerate(cols):
        for ri, v in col.items():
            A_[ri, ci] = v
    gens = kernel_mod_pk(A_, p, 1, cols=len(dom))
    low = [i for i, (j, k, mono) in enumerate(dom) if k < A]
    for g in gens:
        if any(g[i] for i in low):
            wit = {}
            for i, (j, k, mono) in enumerate(dom):
                if g[i]:
                    coef = CoefElem(specs[j], {mono: 1}).to_text()
                    wit[f"slice {j}: {coef}*u^{k}"] = int(g[i])
            return {"degree": D, "vector": wit}
    return None


def kernel_vanishing_check(e: EulerClass, model: FilteredModuleModel, A: int, q: int,
                           min_degree: int | None = None, find_minimal_window: bool = True
                           ) -> KernelCertificate:
    """Certify that e = Pi - e_+ has no kernel mod u^A when tested mod u^{A + qB}.

    ``e`` carries Pi (an Euler class over a BP law); e_+ is the model's
    connecting part.  Kernels are computed in total degrees 2d for
    d in [min_degree/2, A - 1] (above that no element is nonzero mod u^A).
    """
    if A < 1 or q < 1:
        raise ValueError("A and q must be positive")
    p = model.p
    if e.series.spec.kind is not Kind.BP or e.series.spec.p != p:
        raise ValueError("Pi must be an Euler class over a BP law at the model's prime")
    if any(h < 1 for h in model.filtration.heights):
        raise ValueError("kernel computation needs slice heights >= 1 (F_p-linear slices)")
    B = bound_B(e.source.exponents(), model.filtration, p)
    W = A + q * B
    if e.series.trunc < W:
        raise TruncationError(f"window A + qB = {W}; the Euler class needs truncation >= {W}")
    bp, t, Pi, N, specs = _prepare(e, model, W)
    deg_e = 2 * len(e.source.weights)
    for key, s in N.items():
        d = s.homogeneous_degree()
        if d is not None and d != deg_e:
            raise ValueError(f"connecting series {key} has degree {d}, Euler class has {deg_e}")
    # e_+^q = 0 after reduction into the target slice
    Nq = {(i, i): USeries.one(bp, W) for i in range(t)}
    for _ in range(q):
        Nq = _mat_mul(Nq, N, t, bp, W)
    nil_ok = all(
        s.map_coefficients(lambda c, sp=specs[tgt]: reduce_coef(c, sp), specs[tgt]).is_zero()
        for (src, tgt), s in Nq.items())
    if not nil_ok:
        raise ArithmeticError(f"e_+^{q} is not zero in the model")
    # e * sum_{i=1..q} Pi^{q-i} e_+^{i-1} = Pi^q - e_+^q, as BP matrices
    E = {(i, i): Pi for i in range(t)}
    for key, s in N.items():
        E[key] = -s
    S = {}
    Npow = {(i, i): USeries.one(bp, W) for i in range(t)}
    for i in range(1, q + 1):
        scal = Pi ** (q - i)
        for key, s in Npow.items():
            term = s * scal
            S[key] = S[key] + term if key in S else term
        Npow = _mat_mul(Npow, N, t, bp, W)
    lhs = _mat_mul(E, S, t, bp, W)
    rhs = {(i, i): Pi ** q for i in range(t)}
    for key, s in Nq.items():
        rhs[key] = rhs[key] - s if key in rhs else -s
    rhs = {k: v for k, v in rhs.items() if not v.is_zero()}
    identity = lhs == rhs
    lo = min_degree if min_degree is not None else -2 * W
    lo -= lo % 2
    degrees = range(2 * (A - 1), lo - 1, -2)

    def witness_at(window):
        for D in degrees:
            w = _kernel_low_part(Pi, N, specs, p, window, A, D, deg_e)
            if w is not None:
                return w
        return None

    wit = witness_at(W)
    minimal = None
    if wit is None and find_minimal_window:
        for window in range(A, W + 1):
            if witness_at(window) is None:
                minimal = window
                break
    return KernelCertificate(A, q, B, W, identity, nil_ok, wit is None, wit,
                             (lo, 2 * (A - 1)), minimal)


def euler_over_bp(weights, p: int, trunc: int) -> EulerClass:
    """Pi for a weight list over BP with every generator relevant below u^trunc."""
    law = build_law(bp_spec_for(p, trunc), trunc)
    return euler_of_weights(law, LineBundleWeights(tuple(weights), p))


__all__.append("euler_over_bp")
