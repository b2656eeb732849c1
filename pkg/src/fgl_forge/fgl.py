"""p-typical formal group laws, their reductions, inverses and l-series.

Every law here is built from a rational logarithm
``log(u) = sum_k lambda_k u^{p^k}`` whose coefficients are fixed by requiring
the p-series to read ``[p](u) = pu +_F v_1 u^p +_F v_2 u^{p^2} +_F ...``.
Applying the logarithm to both sides turns this into one linear equation per
power ``u^{p^m}``::

    (p - p^{p^m}) lambda_m = sum_{i=1..m} lambda_{m-i} v_i^{p^{m-i}}

which is solved degree by degree over the rationals.  The group law itself is
``F(x, y) = exp(log x + log y)`` reduced into the target coefficient ring; the
p-integrality of every coefficient is asserted during the reduction.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction

import flint

from .ringcore import (
    CoefElem,
    Kind,
    NonIntegralError,
    RingSpec,
    reduce_coef,
)
from .series import (
    BiSeries,
    USeries,
    series_compose,
    series_inverse,
    series_mul,
    series_reversion,
)

__all__ = [
    "Provenance",
    "FormalGroupLaw",
    "PIntegralityError",
    "lift_spec",
    "ptypical_log",
    "build_ptypical",
    "build_law",
    "reduce_fgl",
    "formal_inverse",
    "l_series",
    "formal_sum",
    "pseries_identity_rhs",
    "check_axioms",
]


class PIntegralityError(ArithmeticError):
    """A coefficient of a law that must be p-integral was not (an implementation bug)."""


class Provenance(Enum):
    PTYPICAL_UNIVERSAL = "PTypicalUniversal"
    PTYPICAL_QUOTIENT = "PTypicalQuotient"
    EN = "En"
    KPR = "Kpr"


_PROVENANCE = {
    Kind.BP: Provenance.PTYPICAL_UNIVERSAL,
    Kind.RATIONAL: Provenance.PTYPICAL_UNIVERSAL,
    Kind.BP_MOD_I: Provenance.PTYPICAL_QUOTIENT,
    Kind.EN: Provenance.EN,
    Kind.KPR: Provenance.KPR,
}


def lift_spec(spec: RingSpec) -> RingSpec:
    """Rational polynomial ring carrying the logarithm of the law over ``spec``."""
    return RingSpec(Kind.RATIONAL, spec.p, spec.n, first=spec.first)


def ptypical_log(rspec: RingSpec, trunc: int) -> USeries:
    """Logarithm over ``rspec`` (rational) with the p-series normalization.

    Generators outside ``rspec.gens`` are treated as zero.
    """
    if rspec.kind is not Kind.RATIONAL:
        raise ValueError("the logarithm lives over a RationalVPoly ring")
    p = rspec.p
    lam = [rspec.one()]
    m = 1
    while p**m < trunc:
        acc = rspec.zero()
        for i in range(1, m + 1):
            if i in rspec.gens:
                acc = acc + lam[m - i] * rspec.gen(i, p ** (m - i))
        lam.append(acc.scale(Fraction(1, p - p ** (p**m))))
        m += 1
    return USeries.from_terms(rspec, trunc, {p**k: c for k, c in enumerate(lam)})


def _solve_log(log: USeries, rhs: USeries, start: USeries) -> USeries:
    """y with log(y) = rhs mod u^T by Newton iteration; start must be right mod u^2."""
    T = rhs.trunc
    spec = rhs.spec
    dlog = log.derivative()
    y = start.truncate(min(2, T))
    prec = y.trunc
    while prec < T:
        prec = min(2 * prec, T)
        y = USeries._raw(spec, prec, y.coeffs + [spec.zero()] * (prec - y.trunc))
        resid = series_compose(log.truncate(prec), y) - rhs.truncate(prec)
        y = y - series_mul(resid, series_inverse(series_compose(dlog.truncate(prec), y)))
    return y


class FormalGroupLaw:
    """A one-dimensional commutative formal group law truncated at total degree ``trunc``.

    The bivariate series ``F`` is computed on first access; l-series use the
    logarithm when one is attached, which keeps large truncation orders cheap.
    """

    def __init__(self, spec: RingSpec, trunc: int, provenance: Provenance,
                 log: USeries | None = None, F: BiSeries | None = None):
        if log is None and F is None:
            raise ValueError("a law needs either a logarithm or its bivariate series")
        self.spec = spec
        self.trunc = trunc
        self.provenance = provenance
        self.log = log
        self._F = F
        self._lseries: dict[int, USeries] = {}

    def __repr__(self):
        return f"FormalGroupLaw({self.provenance.value}, {self.spec.describe()}, T={self.trunc})"

    @property
    def lift(self) -> RingSpec | None:
        return self.log.spec if self.log is not None else None

    @property
    def F(self) -> BiSeries:
        if self._F is None:
            self._F = self._compute_F()
        return self._F

    def reduce(self, c: CoefElem) -> CoefElem:
        """Map a coefficient of the rational lift into the law's ring."""
        try:
            return reduce_coef(c, self.spec)
        except NonIntegralError as exc:
            raise PIntegralityError(str(exc)) from None

    def _compute_F(self) -> BiSeries:
        T = self.trunc
        rs = self.log.spec
        exp = series_reversion(self.log)
        s = BiSeries(rs, T, {(k, 0): c for k, c in enumerate(self.log.coeffs) if c.terms})
        s = s + s.swap()
        total = BiSeries(rs, T)
        power = BiSeries(rs, T, {(0, 0): rs.one()})
        for k in range(1, T):
            power = power * s
            if exp.coeffs[k].terms:
                total = total + BiSeries(rs, T, {key: exp.coeffs[k] * c for key, c in power.coeffs.items()})
        return total.map_coefficients(self.reduce, self.spec)

    def variable(self) -> USeries:
        return USeries.variable(self.spec, self.trunc)

    def to_json(self) -> dict:
        out = {
            "ring": self.spec.describe(),
            "provenance": self.provenance.value,
            "trunc": self.trunc,
            "F": self.F.to_json(),
        }
        if self.spec.kind is Kind.KPR and self.spec.r > 1:
            out["convention"] = "quotient law: E(n) law with v_1..v_{n-1} killed, reduced mod p^r"
        return out


def build_ptypical(spec: RingSpec, trunc: int) -> FormalGroupLaw:
    """The p-typical law over BP*/(v_{>n}) to total degree ``trunc``."""
    if spec.kind is not Kind.BP:
        raise ValueError(f"build_ptypical needs a BPTruncated ring, got {spec.describe()}")
    return build_law(spec, trunc)


def build_law(spec: RingSpec, trunc: int) -> FormalGroupLaw:
    """Law over any supported ring, computed from the logarithm with the
    non-retained generators set to zero.

    Equals ``reduce_fgl(build_ptypical(BP), spec)`` but skips the
    bivariate BP computation, so it scales to large ``trunc``.
    """
    if trunc < 2:
        raise ValueError("truncation order must be at least 2")
    rs = lift_spec(spec)
    return FormalGroupLaw(spec, trunc, _PROVENANCE[spec.kind], log=ptypical_log(rs, trunc))


def reduce_fgl(law: FormalGroupLaw, target: RingSpec, check: bool = True) -> FormalGroupLaw:
    """Coefficient-wise reduction along a legal ring map."""
    F = law.F.map_coefficients(lambda c: reduce_coef(c, target), target)
    log = None
    if law.log is not None:
        tl = lift_spec(target)
        log = law.log.map_coefficients(lambda c: reduce_coef(c, tl), tl)
    out = FormalGroupLaw(target, law.trunc, _PROVENANCE[target.kind], log=log, F=F)
    if check:
        res = check_axioms(out)
        if not all(res.values()):
            raise ArithmeticError(f"reduced law fails the group-law axioms: {res}")
    return out


def formal_sum(law: FormalGroupLaw, a: USeries, b: USeries) -> USeries:
    """a +_F b for series with zero constant term, via the bivariate law."""
    return law.F.substitute(a, b)


def formal_inverse(law: FormalGroupLaw, method: str = "auto") -> USeries:
    """iota(u) with F(u, iota(u)) = 0 mod u^T."""
    if method == "auto":
        method = "log" if law.log is not None else "newton"
    if method == "log":
        return l_series(law, -1, method="log")
    if method != "newton":
        raise ValueError(f"unknown method {method!r}")
    spec, T = law.spec, law.trunc
    F = law.F
    Fy = BiSeries(spec, T, {(i, j - 1): c.scale(j) for (i, j), c in F.coeffs.items() if j > 0})
    u = law.variable()
    y = -u
    prec = 2
    while prec < T:
        prec = min(2 * prec, T)
        Fp = BiSeries(spec, prec, F.coeffs)
        Fyp = BiSeries(spec, prec, Fy.coeffs)
        up = u.truncate(prec)
        yp = USeries._raw(spec, prec, (y.coeffs + [spec.zero()] * prec)[:prec])
        val = Fp.substitute(up, yp)
        dval = Fyp.substitute(up, yp)
        y = yp - series_mul(val, series_inverse(dval))
    return y.truncate(T) if y.trunc > T else y


def l_series(law: FormalGroupLaw, l: int, method: str = "auto") -> USeries:
    """[l](u) for any integer l.

    ``log``: exp(l log u) computed over the rational lift and reduced.  When
    the lift has a single generator v, homogeneity pins the power of v in
    every coefficient, so the series is solved over Q with v = 1 first.
    ``chain``: binary addition chain over the bivariate law, with
    [-l] = iota o [l].  ``auto`` prefers the logarithm when the law has one.
    """
    if method == "auto":
        method = "log" if law.log is not None else "chain"
    key = (l, method)
    if key in law._lseries:
        return law._lseries[key]
    spec, T = law.spec, law.trunc
    if l == 0:
        out = USeries.zero(spec, T)
    elif l == 1:
        out = law.variable()
    elif method == "log" and len(law.log.spec.gens) == 1:
        out = _single_generator_l_series(law, l)
    elif method in ("log", "log-generic"):
        log = law.log
        rs = log.spec
        rhs = log.scale(l)
        start = USeries.monomial(rs, T, 1, rs.const(l))
        y = _solve_log(log, rhs, start)
        out = y.map_coefficients(law.reduce, spec)
    elif method == "chain":
        out = _chain(law, abs(l))
        if l < 0:
            out = series_compose(formal_inverse(law, "newton"), out)
    else:
        raise ValueError(f"unknown method {method!r}")
    law._lseries[key] = out
    return out


def _single_generator_l_series(law: FormalGroupLaw, l: int) -> USeries:
    log = law.log
    rs = log.spec
    (g,) = rs.gens
    step = rs.p**g - 1
    T = law.trunc
    scal = [Fraction(0)] * T
    for k, c in enumerate(log.coeffs):
        for exps, q in c.terms.items():
            scal[k] = q
    saved = flint.ctx.cap
    flint.ctx.cap = max(saved, T)
    try:
        L = flint.fmpq_series([flint.fmpq(q.numerator, q.denominator) for q in scal], prec=T)
        y = L.reversion()(L * l).coeffs()
    finally:
        flint.ctx.cap = saved
    y += [0] * (T - len(y))
    coeffs = []
    for k in range(T):
        q = flint.fmpq(y[k])
        if q == 0:
            coeffs.append(rs.zero())
            continue
        e, rem = divmod(k - 1, step)
        if rem:
            raise ArithmeticError(f"inhomogeneous coefficient at u^{k}")
        coeffs.append(rs.monomial({g: e}, Fraction(int(q.p), int(q.q))))
    return USeries._raw(rs, T, coeffs).map_coefficients(law.reduce, law.spec)


def _chain(law: FormalGroupLaw, l: int) -> USeries:
    u = law.variable()
    acc = u
    for bit in bin(l)[3:]:
        acc = formal_sum(law, acc, acc)
        if bit == "1":
            acc = formal_sum(law, acc, u)
    return acc


def pseries_identity_rhs(law: FormalGroupLaw) -> USeries:
    """pu +_F v_1 u^p +_F v_2 u^{p^2} +_F ... with the generators of the law's ring."""
    spec, T, p = law.spec, law.trunc, law.spec.p
    acc = USeries.monomial(spec, T, 1, spec.const(p))
    for k in spec.gens:
        if p**k >= T:
            break
        term = USeries.monomial(spec, T, p**k, spec.gen(k))
        acc = formal_sum(law, acc, term)
    return acc


def check_axioms(law: FormalGroupLaw) -> dict[str, bool]:
    """Unit, commutativity and associativity of F, exactly at truncation."""
    F = law.F
    spec, T = law.spec, law.trunc
    x_only = {(i, j): c for (i, j), c in F.coeffs.items() if j == 0}
    unit = x_only == ({(1, 0): spec.one()} if T > 1 else {})
    commutative = F == F.swap()
    return {"unit": unit, "commutative": commutative, "associative": _associative(F)}


def _tri_compose_left(F: BiSeries) -> dict:
    """F(F(x, y), z) as {(a, b, c): coef}."""
    T = F.trunc
    out: dict = {}
    powers = [BiSeries(F.spec, T, {(0, 0): F.spec.one()})]
    maxi = max((i for i, _ in F.coeffs), default=0)
    for _ in range(maxi):
        powers.append(powers[-1] * F)
    for (i, k), c in F.coeffs.items():
        for (a, b), g in powers[i].coeffs.items():
            if a + b + k >= T:
                continue
            key = (a, b, k)
            val = c * g
            out[key] = out[key] + val if key in out else val
    return {k: v for k, v in out.items() if v.terms}


def _associative(F: BiSeries) -> bool:
    left = _tri_compose_left(F)
    # F(x, F(y, z)) = F(F(z, y), x) by commutativity-free relabelling of the same routine
    right_raw = _tri_compose_left(F.swap())
    # right_raw[(a, b, c)] is the coefficient of G(G(x,y),z) with G = F.swap, i.e.
    # F(z, F(y, x)); rename (x, y, z) -> (z, y, x) to get F(x, F(y, z)).
    right = {(c, b, a): v for (a, b, c), v in right_raw.items()}
    return left == right
