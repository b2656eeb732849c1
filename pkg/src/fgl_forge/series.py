"""Truncated power series in u (|u| = 2) and in two variables x, y.

A ``USeries`` holds ``trunc`` coefficients (u^0 .. u^{trunc-1}) densely;
coefficients are sparse ``CoefElem`` values.  Every operation keeps a single
truncation order and refuses to combine series of different orders; use
``truncate`` explicitly when a lower order is wanted.
"""

from __future__ import annotations

from typing import Callable, Iterable

from .ringcore import CoefElem, Ideal, RingSpec, SpecMismatchError, is_unit, parse_coef

__all__ = [
    "USeries",
    "BiSeries",
    "TruncationError",
    "ZeroModIdealError",
    "series_mul",
    "series_compose",
    "series_reversion",
    "series_inverse",
    "lowest_term",
    "compose_precision",
]


class TruncationError(ValueError):
    """Raised when truncation orders do not match or are too small."""


class ZeroModIdealError(ValueError):
    """The series vanishes modulo the requested ideal (up to its truncation)."""


class USeries:
    __slots__ = ("spec", "trunc", "coeffs")

    def __init__(self, spec: RingSpec, trunc: int, coeffs: Iterable[CoefElem] = ()):
        if trunc < 1:
            raise TruncationError("truncation order must be positive")
        cs = list(coeffs)[:trunc]
        zero = spec.zero()
        for c in cs:
            if c.spec != spec:
                raise SpecMismatchError(
                    f"coefficient in {c.spec.describe()} for series over {spec.describe()}")
        cs.extend([zero] * (trunc - len(cs)))
        self.spec = spec
        self.trunc = trunc
        self.coeffs = cs

    @classmethod
    def _raw(cls, spec, trunc, coeffs):
        obj = cls.__new__(cls)
        obj.spec = spec
        obj.trunc = trunc
        obj.coeffs = coeffs
        return obj

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, spec: RingSpec, trunc: int) -> USeries:
        return cls(spec, trunc)

    @classmethod
    def one(cls, spec: RingSpec, trunc: int) -> USeries:
        return cls(spec, trunc, [spec.one()])

    @classmethod
    def variable(cls, spec: RingSpec, trunc: int) -> USeries:
        return cls.monomial(spec, trunc, 1)

    @classmethod
    def monomial(cls, spec: RingSpec, trunc: int, k: int, c: CoefElem | None = None) -> USeries:
        s = cls(spec, trunc)
        if k < trunc:
            s.coeffs[k] = spec.one() if c is None else c
        return s

    @classmethod
    def from_terms(cls, spec: RingSpec, trunc: int, terms: dict[int, CoefElem]) -> USeries:
        s = cls(spec, trunc)
        for k, c in terms.items():
            if k < 0:
                raise ValueError("negative u-exponent")
            if k < trunc:
                s.coeffs[k] = c if isinstance(c, CoefElem) else spec.const(c)
        return s

    # -- protocol -------------------------------------------------------------

    def __getitem__(self, k: int) -> CoefElem:
        if 0 <= k < self.trunc:
            return self.coeffs[k]
        raise IndexError(f"u^{k} is beyond the truncation order {self.trunc}")

    def __eq__(self, other):
        if not isinstance(other, USeries):
            return NotImplemented
        return self.spec == other.spec and self.trunc == other.trunc and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.spec, self.trunc, tuple(self.coeffs)))

    def __repr__(self):
        return f"USeries({self.spec.describe()}, {self.to_text()})"

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def support(self) -> list[int]:
        return [k for k, c in enumerate(self.coeffs) if c.terms]

    def valuation(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c.terms:
                return k
        return None

    def _same(self, other: USeries):
        if not isinstance(other, USeries):
            raise TypeError(f"expected USeries, got {type(other).__name__}")
        if other.spec != self.spec:
            raise SpecMismatchError(
                f"series over {self.spec.describe()} vs {other.spec.describe()}")
        if other.trunc != self.trunc:
            raise TruncationError(f"truncation mismatch: O(u^{self.trunc}) vs O(u^{other.trunc})")

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: USeries) -> USeries:
        self._same(other)
        return USeries._raw(self.spec, self.trunc, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: USeries) -> USeries:
        self._same(other)
        return USeries._raw(self.spec, self.trunc, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> USeries:
        return USeries._raw(self.spec, self.trunc, [-a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, USeries):
            return series_mul(self, other)
        if isinstance(other, CoefElem) or isinstance(other, int):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def scale(self, c) -> USeries:
        if isinstance(c, int):
            return USeries._raw(self.spec, self.trunc, [a.scale(c) for a in self.coeffs])
        return USeries._raw(self.spec, self.trunc, [a * c for a in self.coeffs])

    def __pow__(self, k: int) -> USeries:
        if k < 0:
            return series_inverse(self) ** (-k)
        return _pow_trunc(self, k, self.trunc)

    def shift(self, k: int) -> USeries:
        """Multiply by u^k (k >= 0) or divide by u^{-k} (exact division required)."""
        T = self.trunc
        if k >= 0:
            zero = self.spec.zero()
            return USeries._raw(self.spec, T, [zero] * min(k, T) + self.coeffs[: max(T - k, 0)])
        d = -k
        if any(c.terms for c in self.coeffs[:d]):
            raise ValueError(f"series is not divisible by u^{d}")
        zero = self.spec.zero()
        return USeries._raw(self.spec, T - d, self.coeffs[d:] or [zero])

    def truncate(self, trunc: int) -> USeries:
        if trunc > self.trunc:
            raise TruncationError(f"cannot raise precision O(u^{self.trunc}) to O(u^{trunc})")
        return USeries._raw(self.spec, trunc, self.coeffs[:trunc])

    def derivative(self) -> USeries:
        zero = self.spec.zero()
        return USeries._raw(
            self.spec, self.trunc,
            [self.coeffs[k].scale(k) for k in range(1, self.trunc)] + [zero])

    def map_coefficients(self, fn: Callable[[CoefElem], CoefElem], spec: RingSpec) -> USeries:
        return USeries(spec, self.trunc, [fn(c) for c in self.coeffs])

    def homogeneous_degree(self) -> int | None:
        """Total degree d if coeffs[j] is homogeneous of degree d - 2j for all j.

        Returns None when the series is not homogeneous (or is zero).
        """
        d = None
        for j, c in enumerate(self.coeffs):
            if not c.terms:
                continue
            cd = c.degree()
            if cd is None:
                return None
            if d is None:
                d = cd + 2 * j
            elif cd + 2 * j != d:
                return None
        return d

    # -- text / json ----------------------------------------------------------

    def to_text(self, with_order: bool = True, var: str = "u") -> str:
        parts = [
            _term_text(c, "" if k == 0 else (var if k == 1 else f"{var}^{k}"))
            for k, c in enumerate(self.coeffs) if c.terms
        ]
        body = _join_terms(parts)
        return f"{body} + O({var}^{self.trunc})" if with_order else body

    def to_json(self) -> dict:
        return {
            "trunc": self.trunc,
            "ring": self.spec.describe(),
            "terms": [[k, c.to_text()] for k, c in enumerate(self.coeffs) if c.terms],
        }

    @classmethod
    def from_json(cls, spec: RingSpec, data: dict) -> USeries:
        return cls.from_terms(spec, int(data["trunc"]),
                              {int(k): parse_coef(spec, t) for k, t in data["terms"]})


def series_mul(f: USeries, g: USeries) -> USeries:
    """Cauchy product truncated at the common order."""
    f._same(g)
    return _mul_trunc(f, g, f.trunc)


def _mul_trunc(f: USeries, g: USeries, T: int) -> USeries:
    spec = f.spec
    fs = [(i, f.coeffs[i]) for i in range(min(f.trunc, T)) if f.coeffs[i].terms]
    gs = [(j, g.coeffs[j]) for j in range(min(g.trunc, T)) if g.coeffs[j].terms]
    out = [spec.zero()] * T
    for i, a in fs:
        lim = T - i
        for j, b in gs:
            if j >= lim:
                break
            out[i + j] = out[i + j] + a * b
    return USeries._raw(spec, T, out)


def _pow_trunc(h: USeries, k: int, T: int) -> USeries:
    """h^k mod u^T; h must carry at least T coefficients."""
    result = USeries.one(h.spec, T)
    if k == 0:
        return result
    base = h.truncate(T) if h.trunc > T else h
    first = True
    while k:
        if k & 1:
            result = base if first else _mul_trunc(result, base, T)
            first = False
        k >>= 1
        if k:
            base = _mul_trunc(base, base, T)
    return result


def compose_precision(f_support_min: int, g_valuation: int, T: int) -> tuple[int, int]:
    """Orders (for f, for g) that make f(g) exact mod u^T.

    f needs its coefficients c_i for i * val(g) < T; g is needed only to
    relative precision T - i_min * val(g) above its valuation, where i_min is
    the least positive index with c_i != 0.
    """
    V = g_valuation
    f_need = -(-T // V)
    g_need = max(T - (f_support_min - 1) * V, V + 1)
    return f_need, g_need


def series_compose(f: USeries, g: USeries, trunc: int | None = None) -> USeries:
    """f(g(u)) mod u^trunc; g must have zero constant term.

    Without ``trunc`` both series must share one order.  With an explicit
    ``trunc`` the inputs may carry different orders provided they are enough
    for an exact answer (see ``compose_precision``); otherwise
    ``TruncationError`` reports the orders required.
    """
    if f.spec != g.spec:
        raise SpecMismatchError(f"series over {f.spec.describe()} vs {g.spec.describe()}")
    if trunc is None:
        f._same(g)
        T = f.trunc
    else:
        T = trunc
    if g.coeffs[0].terms:
        raise ValueError("cannot compose with a series that has a nonzero constant term")
    spec = f.spec
    V = g.valuation()
    if V is None:
        if T > g.trunc and any(c.terms for c in f.coeffs[1:]):
            raise TruncationError(f"inner series is zero only to O(u^{g.trunc})")
        return USeries(spec, T, [f.coeffs[0]])
    support = [i for i in range(1, f.trunc) if f.coeffs[i].terms and i * V < T]
    f_need, g_need = compose_precision(support[0] if support else 1, V, T)
    if f.trunc < f_need and f.trunc * V < T:
        raise TruncationError(f"outer series needs O(u^{f_need}), has O(u^{f.trunc})")
    if support and g.trunc < g_need:
        raise TruncationError(f"inner series needs O(u^{g_need}), has O(u^{g.trunc})")
    out = [spec.zero()] * T
    out[0] = f.coeffs[0]
    if not support:
        return USeries._raw(spec, T, out)
    R0 = T - support[0] * V
    h = USeries._raw(spec, R0, (g.coeffs[V:V + R0] + [spec.zero()] * R0)[:R0])
    prev = support[0]
    P = _pow_trunc(h, prev, R0)
    for idx, i in enumerate(support):
        R = T - i * V
        if idx:
            step = _pow_trunc(h, i - prev, R)
            P = _mul_trunc(P, step, R)
            prev = i
        c = f.coeffs[i]
        base = i * V
        for t in range(R):
            pc = P.coeffs[t]
            if pc.terms:
                out[base + t] = out[base + t] + c * pc
    return USeries._raw(spec, T, out)


def series_inverse(f: USeries) -> USeries:
    """1/f mod u^T; the constant term must be a unit."""
    a0 = f.coeffs[0]
    if not is_unit(a0):
        raise ArithmeticError(f"constant term {a0.to_text()} is not a unit")
    inv0 = a0.inverse()
    T = f.trunc
    spec = f.spec
    nz = [(i, f.coeffs[i]) for i in range(1, T) if f.coeffs[i].terms]
    b = [spec.zero()] * T
    b[0] = inv0
    neg_inv0 = -inv0
    for k in range(1, T):
        acc = spec.zero()
        for i, a in nz:
            if i > k:
                break
            bk = b[k - i]
            if bk.terms:
                acc = acc + a * bk
        b[k] = neg_inv0 * acc
    return USeries._raw(spec, T, b)


def series_reversion(f: USeries) -> USeries:
    """g with f(g(u)) = u mod u^T, by Newton iteration on the precision."""
    T = f.trunc
    spec = f.spec
    if f.coeffs[0].terms:
        raise ValueError("reversion needs f(0) = 0")
    a1 = f.coeffs[1] if T > 1 else spec.zero()
    if T > 1 and not is_unit(a1):
        raise ArithmeticError(f"linear coefficient {a1.to_text()} is not a unit")
    if T <= 2:
        return USeries(spec, T, [spec.zero(), a1.inverse()] if T == 2 else [])
    g = USeries(spec, 2, [spec.zero(), a1.inverse()])
    prec = 2
    while prec < T:
        prec = min(2 * prec, T)
        g = USeries._raw(spec, prec, g.coeffs + [spec.zero()] * (prec - g.trunc))
        ft = f.truncate(prec)
        resid = series_compose(ft, g) - USeries.variable(spec, prec)
        dfg = series_compose(ft.derivative(), g)
        g = g - series_mul(resid, series_inverse(dfg))
    return g


def lowest_term(f: USeries, modulo: Ideal | None = None) -> tuple[int, CoefElem]:
    """Least u-exponent whose coefficient survives modulo the ideal.

    The returned coefficient is the unreduced coefficient of that power.
    """
    modulo = modulo or Ideal("none")
    for k, c in enumerate(f.coeffs):
        if c.terms and not c.in_ideal(modulo):
            return k, c
    raise ZeroModIdealError(f"series is zero modulo {modulo} up to O(u^{f.trunc})")


class BiSeries:
    """Truncated series in x, y: coefficients for (i, j) with i + j < trunc."""

    __slots__ = ("spec", "trunc", "coeffs")

    def __init__(self, spec: RingSpec, trunc: int, coeffs: dict[tuple[int, int], CoefElem] | None = None):
        self.spec = spec
        self.trunc = trunc
        self.coeffs = {
            (i, j): c for (i, j), c in (coeffs or {}).items() if c.terms and i + j < trunc
        }

    def __getitem__(self, key: tuple[int, int]) -> CoefElem:
        i, j = key
        if i + j >= self.trunc:
            raise IndexError(f"x^{i}y^{j} is beyond the truncation order {self.trunc}")
        return self.coeffs.get(key, self.spec.zero())

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return self.spec == other.spec and self.trunc == other.trunc and self.coeffs == other.coeffs

    def _same(self, other: BiSeries):
        if other.spec != self.spec:
            raise SpecMismatchError(f"{self.spec.describe()} vs {other.spec.describe()}")
        if other.trunc != self.trunc:
            raise TruncationError(f"truncation mismatch: {self.trunc} vs {other.trunc}")

    def __add__(self, other: BiSeries) -> BiSeries:
        self._same(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return BiSeries(self.spec, self.trunc, out)

    def __sub__(self, other: BiSeries) -> BiSeries:
        self._same(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] - c if k in out else -c
        return BiSeries(self.spec, self.trunc, out)

    def __mul__(self, other: BiSeries) -> BiSeries:
        self._same(other)
        T = self.trunc
        out: dict = {}
        for (i, j), a in self.coeffs.items():
            for (k, l), b in other.coeffs.items():
                if i + j + k + l >= T:
                    continue
                key = (i + k, j + l)
                out[key] = out[key] + a * b if key in out else a * b
        return BiSeries(self.spec, T, out)

    def swap(self) -> BiSeries:
        return BiSeries(self.spec, self.trunc, {(j, i): c for (i, j), c in self.coeffs.items()})

    def restrict_y0(self) -> USeries:
        """F(x, 0) as a series in x."""
        return USeries.from_terms(self.spec, self.trunc,
                                  {i: c for (i, j), c in self.coeffs.items() if j == 0})

    def map_coefficients(self, fn: Callable[[CoefElem], CoefElem], spec: RingSpec) -> BiSeries:
        return BiSeries(spec, self.trunc, {k: fn(c) for k, c in self.coeffs.items()})

    def substitute(self, a: USeries, b: USeries) -> USeries:
        """F(a(u), b(u)) mod u^T; a and b need zero constant terms."""
        a._same(b)
        if a.coeffs[0].terms or b.coeffs[0].terms:
            raise ValueError("substituted series need zero constant terms")
        spec, T = a.spec, a.trunc
        maxdeg = max((i + j for i, j in self.coeffs), default=0)
        apow = [USeries.one(spec, T)]
        bpow = [USeries.one(spec, T)]
        for _ in range(min(maxdeg, T - 1)):
            apow.append(_mul_trunc(apow[-1], a, T))
            bpow.append(_mul_trunc(bpow[-1], b, T))
        rows: dict[int, list] = {}
        for (i, j), c in self.coeffs.items():
            if i < T and j < T and i + j < T:
                rows.setdefault(i, []).append((j, c))
        total = [spec.zero()] * T
        for i, entries in sorted(rows.items()):
            q = [spec.zero()] * T
            for j, c in entries:
                for t, x in enumerate(bpow[j].coeffs):
                    if x.terms:
                        q[t] = q[t] + c * x
            prod = _mul_trunc(apow[i], USeries._raw(spec, T, q), T)
            total = [s + t for s, t in zip(total, prod.coeffs)]
        return USeries._raw(spec, T, total)

    def to_text(self) -> str:
        parts = []
        for (i, j), c in sorted(self.coeffs.items(), key=lambda kv: (kv[0][0] + kv[0][1], -kv[0][0])):
            mono = "*".join(
                s for s in (
                    "" if i == 0 else ("x" if i == 1 else f"x^{i}"),
                    "" if j == 0 else ("y" if j == 1 else f"y^{j}"),
                ) if s)
            parts.append(_term_text(c, mono))
        return _join_terms(parts) + f" + O(deg {self.trunc})"

    def to_json(self) -> dict:
        return {
            "trunc": self.trunc,
            "ring": self.spec.describe(),
            "terms": [[i, j, c.to_text()] for (i, j), c in
                      sorted(self.coeffs.items(), key=lambda kv: (kv[0][0] + kv[0][1], -kv[0][0]))],
        }


def _term_text(c: CoefElem, mono: str) -> tuple[bool, str]:
    """(negative, body) for one term c*mono."""
    ct = c.to_text()
    neg = False
    if len(c.terms) == 1 and ct.startswith("-"):
        neg, ct = True, ct[1:]
    if not mono:
        return neg, ct
    if ct == "1":
        return neg, mono
    if len(c.terms) > 1:
        return neg, f"({ct})*{mono}"
    return neg, f"{ct}*{mono}"


def _join_terms(parts: list[tuple[bool, str]]) -> str:
    if not parts:
        return "0"
    out = [("-" if parts[0][0] else "") + parts[0][1]]
    for neg, body in parts[1:]:
        out.append((" - " if neg else " + ") + body)
    return "".join(out)
