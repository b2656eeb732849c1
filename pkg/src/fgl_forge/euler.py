"""Euler classes of sums of weighted line bundles and their leading forms.

For a weight list (a_1, ..., a_m) the Euler class is the product of the
l-series [a_i](u).  Over a height-n theory each factor [x p^w](u) starts, mod
the maximal ideal, at u^{p^{nw}} with a unit coefficient, so the product has
the shape u^k x + m with k = sum_i p^{n w_i}.

``ab_injectivity_check`` tests that multiplication by such a class has zero
kernel on a synthetic filtered module, by exact linear algebra after
specializing v_n to 1 (the base ring becomes Z/p^r).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fgl import FormalGroupLaw, Provenance, l_series
from .linalg import kernel_mod_pk
from .ringcore import M0, CoefElem, Kind, is_unit, p_valuation
from .series import TruncationError, USeries, ZeroModIdealError, lowest_term

__all__ = [
    "ZeroWeightError",
    "UnitCertificateError",
    "LineBundleWeights",
    "EulerClass",
    "LeadingForm",
    "InjectivityCertificate",
    "euler_of_weights",
    "leading_form",
    "ab_injectivity_check",
]


class ZeroWeightError(ValueError):
    """A zero weight: the circle must fix exactly the zero section."""


class UnitCertificateError(ArithmeticError):
    """The coefficient of u^k failed to be a unit."""


@dataclass(frozen=True)
class LineBundleWeights:
    weights: tuple[int, ...]
    p: int
    decomposition: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        ws = tuple(int(w) for w in self.weights)
        if any(w == 0 for w in ws):
            raise ZeroWeightError(
                "zero weight: the circle must act with the zero section as its only fixed set")
        object.__setattr__(self, "weights", ws)
        dec = []
        for w in ws:
            e = p_valuation(w, self.p)
            dec.append((w // self.p**e, e))
        object.__setattr__(self, "decomposition", tuple(dec))

    def exponents(self) -> tuple[int, ...]:
        return tuple(e for _, e in self.decomposition)

    def leading_exponent(self, n: int) -> int:
        """k = sum over weights of p^{n w}."""
        return sum(self.p ** (n * e) for e in self.exponents())


@dataclass(frozen=True)
class EulerClass:
    series: USeries
    source: LineBundleWeights
    law: FormalGroupLaw = field(repr=False, compare=False)


def euler_of_weights(law: FormalGroupLaw, wts: LineBundleWeights | list[int] | tuple[int, ...]) -> EulerClass:
    if not isinstance(wts, LineBundleWeights):
        wts = LineBundleWeights(tuple(wts), law.spec.p)
    if wts.p != law.spec.p:
        raise ValueError(f"weights decomposed at p={wts.p}, law at p={law.spec.p}")
    prod = USeries.one(law.spec, law.trunc)
    for w in wts.weights:
        prod = prod * l_series(law, w)
    return EulerClass(prod, wts, law)


@dataclass(frozen=True)
class LeadingForm:
    """e = u^k x(u) + m with x(0) a unit and m in m_0[[u]]."""

    k: int
    x: CoefElem
    remainder_in_m0: bool
    coefficient: CoefElem
    unit_series: USeries

    def __iter__(self):
        return iter((self.k, self.x, self.remainder_in_m0))


def leading_form(e: EulerClass) -> LeadingForm:
    """Leading form with k from the weights and a certified unit coefficient."""
    law = e.law
    if law.provenance not in (Provenance.KPR, Provenance.EN):
        raise ValueError("leading forms need a Kpr or En law (where m_0 is the maximal ideal)")
    n = law.spec.n
    k = e.source.leading_exponent(n)
    T = e.series.trunc
    if k >= T:
        raise TruncationError(f"truncation too small: u^{k} needs T >= {k + 1}")
    coef = e.series[k]
    x = coef.mod_ideal(M0)
    if not (is_unit(x) and is_unit(coef)):
        raise UnitCertificateError(f"coefficient of u^{k} is {coef.to_text()}, not a unit")
    low_in_m0 = all(e.series[j].in_ideal(M0) for j in range(k))
    try:
        first, _ = lowest_term(e.series, M0)
    except ZeroModIdealError:
        first = None
    if first != k:
        raise UnitCertificateError(f"lowest term mod m_0 sits at u^{first}, expected u^{k}")
    unit_series = USeries(law.spec, T - k, e.series.coeffs[k:])
    return LeadingForm(k, x, low_in_m0, coef, unit_series)


@dataclass(frozen=True)
class InjectivityCertificate:
    kernel_empty: bool
    kernel_basis: list
    k: int
    trunc: int
    checked_through: int
    module_rank: int
    filtration_degrees: tuple[int, ...]
    specialization: str = "v_n -> 1"

    def to_json(self) -> dict:
        return {
            "kernel_empty": self.kernel_empty,
            "kernel_basis": self.kernel_basis,
            "k": self.k,
            "T": self.trunc,
            "checked_through_order": self.checked_through,
            "module_rank": self.module_rank,
            "filtration_degrees": list(self.filtration_degrees),
            "specialization": self.specialization,
        }


def _residues(s: USeries, T: int) -> list[int]:
    out = []
    for j in range(T):
        c = s.coeffs[j] if j < s.trunc else None
        if c is None or not c.terms:
            out.append(0)
        else:
            out.append(c.specialize_vn().get((), 0))
    return out


def ab_injectivity_check(e: EulerClass, module_rank: int, filtration_degrees, T: int | None = None,
                         nilpotent: dict | None = None, k: int | None = None) -> InjectivityCertificate:
    """Kernel of multiplication by e on a free filtered module over Z/p^r[[u]]/u^T.

    The module has basis b_0..b_{rank-1}, b_i sitting in filtration degree
    ``filtration_degrees[i]``.  ``nilpotent`` optionally adds a strictly
    filtration-raising part {(src, tgt): USeries}, acting as
    b_src -> series * b_tgt.  Inputs nu are taken through u-order T - k, so a
    nonzero kernel is a genuine obstruction rather than a truncation artifact.
    """
    law = e.law
    spec = law.spec
    if spec.kind is not Kind.KPR:
        raise ValueError("the injectivity engine works over K_{p^r}(n) (v_n -> 1 gives Z/p^r)")
    degs = tuple(int(d) for d in filtration_degrees)
    if len(degs) != module_rank or module_rank < 1:
        raise ValueError("one filtration degree per basis element is required")
    if any(d < 0 for d in degs):
        raise ValueError("filtration degrees must be non-negative")
    if T is None:
        T = e.series.trunc
    if T > e.series.trunc:
        raise TruncationError(f"T={T} exceeds the Euler class precision {e.series.trunc}")
    if k is None:
        k = e.source.leading_exponent(spec.n)
    if T <= k:
        raise TruncationError(f"truncation too small: minimal admissible T is {k + 1}")
    nil = {}
    for (src, tgt), s in (nilpotent or {}).items():
        if not (0 <= src < module_rank and 0 <= tgt < module_rank):
            raise ValueError(f"nilpotent entry ({src}, {tgt}) outside the basis")
        if degs[tgt] <= degs[src]:
            raise ValueError(f"nilpotent entry ({src}, {tgt}) does not raise filtration")
        nil[(src, tgt)] = _residues(s, T)
    mod = spec.modulus
    ecoef = _residues(e.series, T)
    D = T - k
    rows = module_rank * T
    cols = module_rank * D
    A = [[0] * cols for _ in range(rows)]

    def add(col_block, row_block, series):
        for a in range(D):
            for j, c in enumerate(series):
                if c and a + j < T:
                    r_ = row_block * T + a + j
                    A[r_][col_block * D + a] = (A[r_][col_block * D + a] + c) % mod

    for i in range(module_rank):
        add(i, i, ecoef)
    for (src, tgt), s in nil.items():
        add(src, tgt, s)
    basis = kernel_mod_pk(A, spec.p, spec.r, cols=cols)
    return InjectivityCertificate(not basis, basis, k, T, D, module_rank, degs)
