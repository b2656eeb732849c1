"""Graded p-local coefficient rings and sparse exact arithmetic in v_1, v_2, ...

Elements are dictionaries from exponent vectors to exact coefficients.  The
exponent vector is aligned with ``RingSpec.gens``; on Laurent rings the last
generator (v_n) may carry a negative exponent.

Coefficient domains:

* ``RATIONAL``: ``Fraction``, any denominator.
* ``BP`` and ``EN``: ``Fraction`` with denominator prime to p (Z_(p)).
* ``KPR``: ``int`` residues in ``[0, p^r)``.
* ``BP_MOD_I``: ``int`` residues mod p, generators ``v_h, v_{h+1}, ...``.

Cohomological degree: ``|v_k| = -2(p^k - 1)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property

__all__ = [
    "Kind",
    "RingSpec",
    "CoefElem",
    "Ideal",
    "SpecMismatchError",
    "NonIntegralError",
    "IllegalReductionError",
    "ring_arithmetic",
    "reduce_coef",
    "is_unit",
    "is_prime",
    "p_valuation",
    "parse_coef",
]


class SpecMismatchError(ValueError):
    pass


class NonIntegralError(ValueError):
    pass


class IllegalReductionError(ValueError):
    pass


class Kind(Enum):
    RATIONAL = "RationalVPoly"
    BP = "BPTruncated"
    EN = "EnRing"
    KPR = "KprRing"
    BP_MOD_I = "BPModI"


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def p_valuation(x, p: int) -> int:
    """p-adic valuation of a nonzero int or Fraction."""
    if isinstance(x, Fraction):
        return p_valuation(x.numerator, p) - p_valuation(x.denominator, p)
    x = abs(int(x))
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class RingSpec:
    """Descriptor of a coefficient ring.

    ``first`` is the index of the lowest retained generator.  It is forced to
    ``n`` for KPR and is the ideal index h for BP_MOD_I (BP*/I_h); RATIONAL
    rings may also start above 1, which is how the rational lifts of the
    quotient laws are modelled.

    ``degree_cutoff`` (None = no cutoff) discards monomials whose degree,
    counted over the non-inverted generators only, is below ``-degree_cutoff``.
    """

    kind: Kind
    p: int
    n: int
    r: int = 1
    first: int = 1
    degree_cutoff: int | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.r < 1:
            raise ValueError("r must be positive")
        if self.r != 1 and self.kind is not Kind.KPR:
            raise ValueError("r > 1 only makes sense for KprRing")
        if self.kind in (Kind.EN, Kind.KPR) and self.n < 1:
            raise ValueError(f"{self.kind.value} needs height n >= 1")
        if self.n < 0 or self.first < 1:
            raise ValueError("bad generator range")
        if self.kind is Kind.KPR:
            object.__setattr__(self, "first", self.n)
        if self.kind is Kind.EN and self.first != 1:
            raise ValueError("EnRing keeps v_1..v_n")
        if self.kind is Kind.BP and self.first != 1:
            raise ValueError("BPTruncated keeps v_1..v_n; use BP_MOD_I for quotients")
        if self.degree_cutoff is not None and (self.degree_cutoff < 0 or self.degree_cutoff % 2):
            raise ValueError("degree_cutoff must be a non-negative even integer")

    @cached_property
    def gens(self) -> tuple[int, ...]:
        return tuple(range(self.first, self.n + 1))

    @cached_property
    def generator_degrees(self) -> tuple[int, ...]:
        return tuple(-2 * (self.p**k - 1) for k in self.gens)

    @property
    def laurent(self) -> bool:
        return self.kind in (Kind.EN, Kind.KPR)

    @cached_property
    def modulus(self) -> int | None:
        if self.kind is Kind.KPR:
            return self.p**self.r
        if self.kind is Kind.BP_MOD_I:
            return self.p
        return None

    @property
    def integral(self) -> bool:
        return self.kind is not Kind.RATIONAL

    def describe(self) -> str:
        parts = [f"p={self.p}", f"n={self.n}"]
        if self.kind is Kind.KPR:
            parts.append(f"r={self.r}")
        if self.first != 1 and self.kind is not Kind.KPR:
            parts.append(f"first=v{self.first}")
        if self.degree_cutoff is not None:
            parts.append(f"cutoff={self.degree_cutoff}")
        return f"{self.kind.value}({', '.join(parts)})"

    # -- element constructors ------------------------------------------------

    def zero(self) -> CoefElem:
        return CoefElem._raw(self, {})

    def one(self) -> CoefElem:
        return self.const(1)

    def const(self, c) -> CoefElem:
        return CoefElem(self, {(0,) * len(self.gens): c})

    def gen(self, k: int, power: int = 1) -> CoefElem:
        if k not in self.gens:
            raise ValueError(f"v{k} is not a generator of {self.describe()}")
        e = [0] * len(self.gens)
        e[self.gens.index(k)] = power
        return CoefElem(self, {tuple(e): 1})

    def monomial(self, exps: dict[int, int], c=1) -> CoefElem:
        e = [0] * len(self.gens)
        for k, a in exps.items():
            if k not in self.gens:
                raise ValueError(f"v{k} is not a generator of {self.describe()}")
            e[self.gens.index(k)] = a
        return CoefElem(self, {tuple(e): c})

    # -- helpers used by the element code -----------------------------------

    def mono_degree(self, exps: tuple[int, ...]) -> int:
        return sum(a * d for a, d in zip(exps, self.generator_degrees))

    def _cut_degree(self, exps: tuple[int, ...]) -> int:
        degs = self.generator_degrees
        if self.laurent:
            return sum(a * d for a, d in zip(exps[:-1], degs[:-1]))
        return sum(a * d for a, d in zip(exps, degs))

    def _coerce(self, c, exps=None):
        m = self.modulus
        if m is not None:
            if isinstance(c, Fraction):
                if c.denominator % self.p == 0:
                    raise NonIntegralError(
                        f"coefficient {c} of {_mono_text(self, exps)} is not {self.p}-integral")
                return c.numerator * pow(c.denominator, -1, m) % m
            return int(c) % m
        c = Fraction(c)
        if self.integral and c.denominator % self.p == 0:
            raise NonIntegralError(
                f"coefficient {c} of {_mono_text(self, exps)} is not {self.p}-integral "
                f"in {self.describe()}")
        return c

    def _check_mono(self, exps: tuple[int, ...]):
        if len(exps) != len(self.gens):
            raise ValueError(f"exponent vector {exps} has wrong length for {self.describe()}")
        last = len(exps) - 1
        for i, a in enumerate(exps):
            if a < 0 and not (self.laurent and i == last):
                raise ValueError(f"negative exponent on v{self.gens[i]} in {self.describe()}")

    def _in_window(self, exps: tuple[int, ...]) -> bool:
        return self.degree_cutoff is None or self._cut_degree(exps) >= -self.degree_cutoff

    # -- ideals ---------------------------------------------------------------

    def term_in_ideal(self, exps, c, ideal: Ideal) -> bool:
        kind = ideal.kind
        if kind == "none":
            return False
        p = self.p
        if kind == "m0":
            if self.kind is Kind.KPR:
                return self.r > 1 and c % p == 0
            if self.kind is Kind.BP_MOD_I:
                return any(a > 0 for a in exps)
            if self.kind is Kind.RATIONAL:
                return any(a > 0 for a in exps)
            if _divisible(c, p):
                return True
            if self.kind is Kind.EN:
                return any(a > 0 for a in exps[:-1])
            return any(a > 0 for a in exps)
        # I_h = (p, v_1, ..., v_{h-1})
        h = ideal.h
        if self.laurent and self.n < h:
            return True
        if self.kind is not Kind.RATIONAL and _divisible(c, p):
            return True
        return any(a > 0 for a, k in zip(exps, self.gens) if k < h)

    def term_m0_valuation(self, exps, c) -> int:
        """Exponent of the m_0-adic filtration containing the term c*v^exps."""
        v = 0 if self.kind in (Kind.RATIONAL, Kind.BP_MOD_I) else _pval_or_big(c, self.p)
        if self.kind is Kind.KPR:
            return v if self.r > 1 else 0
        if self.kind is Kind.EN:
            return v + sum(a for a in exps[:-1] if a > 0)
        return v + sum(exps)


def _divisible(c, p: int) -> bool:
    if isinstance(c, Fraction):
        return c.numerator % p == 0
    return c % p == 0


def _pval_or_big(c, p: int) -> int:
    if c == 0:
        return 10**9
    return p_valuation(c, p)


@dataclass(frozen=True)
class Ideal:
    """Ideal selector: ``none``, ``m0`` or ``I`` (with h: I_h = (p, v_1..v_{h-1}))."""

    kind: str = "none"
    h: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "m0", "I"):
            raise ValueError(f"unknown ideal selector {self.kind!r}")
        if self.kind == "I" and self.h < 1:
            raise ValueError("I_h needs h >= 1")

    @classmethod
    def parse(cls, text: str) -> Ideal:
        text = text.strip()
        if text in ("none", "m0"):
            return cls(text)
        m = re.fullmatch(r"I(?:_)?(\d+)", text)
        if m:
            return cls("I", int(m.group(1)))
        raise ValueError(f"cannot parse ideal selector {text!r}")

    def __str__(self):
        return f"I{self.h}" if self.kind == "I" else self.kind


NONE = Ideal("none")
M0 = Ideal("m0")


class CoefElem:
    """An immutable sparse element of the ring described by ``spec``."""

    __slots__ = ("spec", "terms", "_hash")

    def __init__(self, spec: RingSpec, terms=None):
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(a) for a in exps)
            spec._check_mono(exps)
            c = spec._coerce(c, exps)
            if c == 0 or not spec._in_window(exps):
                continue
            clean[exps] = clean.get(exps, 0) + c
        if spec.modulus is not None:
            clean = {e: c % spec.modulus for e, c in clean.items()}
        self.spec = spec
        self.terms = {e: c for e, c in clean.items() if c != 0}
        self._hash = None

    @classmethod
    def _raw(cls, spec, terms):
        obj = cls.__new__(cls)
        obj.spec = spec
        obj.terms = terms
        obj._hash = None
        return obj

    # -- basic protocol -------------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, CoefElem):
            return self.spec == other.spec and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == self.spec.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.spec, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"CoefElem({self.spec.describe()}, {self.to_text()})"

    def __str__(self):
        return self.to_text()

    def _check(self, other) -> CoefElem:
        if isinstance(other, CoefElem):
            if other.spec != self.spec:
                raise SpecMismatchError(
                    f"ring mismatch: {self.spec.describe()} vs {other.spec.describe()}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.spec.const(other)
        raise TypeError(f"cannot combine CoefElem with {type(other).__name__}")

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = self._check(other)
        m = self.spec.modulus
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if m is not None:
                s %= m
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return CoefElem._raw(self.spec, out)

    __radd__ = __add__

    def __neg__(self):
        m = self.spec.modulus
        if m is None:
            return CoefElem._raw(self.spec, {e: -c for e, c in self.terms.items()})
        return CoefElem._raw(self.spec, {e: (-c) % m for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return self.scale(other)
        other = self._check(other)
        a, b = self.terms, other.terms
        if not a or not b:
            return CoefElem._raw(self.spec, {})
        spec = self.spec
        m = spec.modulus
        out: dict = {}
        get = out.get
        if len(a) == 1 and len(b) == 1:
            (ea, ca), = a.items()
            (eb, cb), = b.items()
            e = tuple(x + y for x, y in zip(ea, eb))
            c = ca * cb
            if m is not None:
                c %= m
            if c and spec._in_window(e):
                out[e] = c
            return CoefElem._raw(spec, out)
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = get(e, 0) + ca * cb
        if m is not None:
            out = {e: c % m for e, c in out.items()}
        cut = spec.degree_cutoff is not None
        return CoefElem._raw(
            spec, {e: c for e, c in out.items() if c and (not cut or spec._in_window(e))})

    __rmul__ = __mul__

    def scale(self, k) -> CoefElem:
        m = self.spec.modulus
        if m is not None:
            k = self.spec._coerce(k)
            out = {e: c * k % m for e, c in self.terms.items()}
            return CoefElem._raw(self.spec, {e: c for e, c in out.items() if c})
        if k == 0:
            return self.spec.zero()
        if self.spec.integral and isinstance(k, Fraction) and k.denominator % self.spec.p == 0:
            raise NonIntegralError(f"scaling by {k} leaves {self.spec.describe()}")
        return CoefElem._raw(self.spec, {e: c * k for e, c in self.terms.items()})

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.spec.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- structure ------------------------------------------------------------

    def degrees(self) -> set[int]:
        return {self.spec.mono_degree(e) for e in self.terms}

    def degree(self) -> int | None:
        """Degree if homogeneous (zero counts as homogeneous of any degree: None)."""
        ds = self.degrees()
        if len(ds) == 1:
            return ds.pop()
        return None

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def constant_term(self):
        return self.terms.get((0,) * len(self.spec.gens), 0)

    def in_ideal(self, ideal: Ideal) -> bool:
        return all(self.spec.term_in_ideal(e, c, ideal) for e, c in self.terms.items())

    def mod_ideal(self, ideal: Ideal) -> CoefElem:
        """Representative with every term lying in ``ideal`` removed."""
        spec = self.spec
        return CoefElem._raw(
            spec, {e: c for e, c in self.terms.items() if not spec.term_in_ideal(e, c, ideal)})

    def m0_valuation(self) -> int:
        if not self.terms:
            return 10**9
        return min(self.spec.term_m0_valuation(e, c) for e, c in self.terms.items())

    def specialize_vn(self):
        """Image under v_n -> 1 (Laurent rings only): a residue or a Fraction."""
        if not self.spec.laurent:
            raise ValueError("v_n -> 1 only applies to rings where v_n is inverted")
        total = {}
        for e, c in self.terms.items():
            key = e[:-1]
            total[key] = total.get(key, 0) + c
        m = self.spec.modulus
        out = {k: (c % m if m else c) for k, c in total.items()}
        return {k: c for k, c in out.items() if c}

    def _unit_term(self):
        """The unique term not in m_0, if there is exactly one; else None."""
        spec = self.spec
        if spec.kind in (Kind.BP, Kind.RATIONAL, Kind.BP_MOD_I):
            c = self.constant_term()
            if c == 0 or (spec.kind is not Kind.RATIONAL and _divisible(c, spec.p)):
                return None
            return (0,) * len(spec.gens), c
        if spec.kind is Kind.KPR:
            live = [(e, c) for e, c in self.terms.items() if c % spec.p]
        else:
            live = [(e, c) for e, c in self.terms.items() if not spec.term_in_ideal(e, c, M0)]
        if len(live) != 1:
            return None
        return live[0]

    def inverse(self, max_steps: int = 4096) -> CoefElem:
        """Multiplicative inverse by geometric series around the unit term.

        Terminates when the non-unit part is nilpotent (p^r = 0, or the
        degree cutoff); otherwise raises ``ArithmeticError``.
        """
        spec = self.spec
        lead = self._unit_term()
        if lead is None:
            raise ArithmeticError(f"{self.to_text()} is not a unit in {spec.describe()}")
        e, c = lead
        m = spec.modulus
        if m is not None:
            cinv = pow(int(c), -1, m)
        else:
            cinv = 1 / Fraction(c)
        neg = tuple(-a for a in e)
        tinv = CoefElem._raw(spec, {neg: cinv})
        rest = self * tinv - spec.one()
        result = spec.one()
        power = spec.one()
        for _ in range(max_steps):
            power = power * (-rest)
            if power.is_zero():
                return result * tinv
            result = result + power
        raise ArithmeticError(
            f"inverse of {self.to_text()} does not terminate in {spec.describe()}; "
            "set a degree cutoff")

    # -- text -----------------------------------------------------------------

    def sorted_terms(self):
        spec = self.spec
        return sorted(self.terms.items(), key=lambda t: (-spec.mono_degree(t[0]), t[0]))

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for e, c in self.sorted_terms():
            mono = _mono_text(self.spec, e)
            neg = isinstance(c, Fraction) and c < 0
            mag = -c if neg else c
            cs = _coef_text(mag)
            if mono == "1":
                body = cs
            elif mag == 1:
                body = mono
            else:
                body = f"{cs}*{mono}"
            if not out:
                out.append(f"-{body}" if neg else body)
            else:
                out.append(f" - {body}" if neg else f" + {body}")
        return "".join(out)

    def needs_parens(self) -> bool:
        return len(self.terms) > 1 or (
            len(self.terms) == 1 and isinstance(next(iter(self.terms.values())), Fraction)
            and next(iter(self.terms.values())) < 0)


def _coef_text(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return str(c)


def _mono_text(spec: RingSpec, exps) -> str:
    if exps is None:
        return "?"
    parts = []
    for k, a in zip(spec.gens, exps):
        if a == 0:
            continue
        parts.append(f"v{k}" if a == 1 else f"v{k}^{a}")
    return "*".join(parts) if parts else "1"


_TERM = re.compile(r"^(?P<coef>\d+(?:/\d+)?)?(?:\*?(?P<mono>v.*))?$")


def parse_coef(spec: RingSpec, text: str) -> CoefElem:
    """Inverse of ``CoefElem.to_text``."""
    text = text.strip()
    if text == "0":
        return spec.zero()
    tokens = re.split(r"\s+([+-])\s+", text)
    signs = [1]
    pieces = [tokens[0]]
    for i in range(1, len(tokens), 2):
        signs.append(-1 if tokens[i] == "-" else 1)
        pieces.append(tokens[i + 1])
    terms: dict = {}
    for sign, piece in zip(signs, pieces):
        piece = piece.strip()
        if piece.startswith("-"):
            sign = -sign
            piece = piece[1:]
        m = _TERM.match(piece)
        if not m or not piece:
            raise ValueError(f"cannot parse term {piece!r}")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        exps = [0] * len(spec.gens)
        if m.group("mono"):
            for factor in m.group("mono").split("*"):
                fm = re.fullmatch(r"v(\d+)(?:\^(-?\d+))?", factor)
                if not fm:
                    raise ValueError(f"cannot parse factor {factor!r}")
                k = int(fm.group(1))
                if k not in spec.gens:
                    raise ValueError(f"v{k} is not a generator of {spec.describe()}")
                exps[spec.gens.index(k)] += int(fm.group(2) or 1)
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + sign * coef
    return CoefElem(spec, terms)


# -- operations -------------------------------------------------------------

def ring_arithmetic(a: CoefElem, b: CoefElem | None, op: str) -> CoefElem:
    if op == "neg":
        return -a
    if b is None:
        raise ValueError(f"{op} needs two operands")
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


_ORDER = {Kind.RATIONAL: 0, Kind.BP: 1, Kind.BP_MOD_I: 2, Kind.EN: 2, Kind.KPR: 3}


def _check_reduction(src: RingSpec, dst: RingSpec):
    def bad(why):
        raise IllegalReductionError(f"cannot reduce {src.describe()} -> {dst.describe()}: {why}")

    if src.p != dst.p:
        bad("different primes")
    if src == dst:
        return
    if _ORDER[dst.kind] < _ORDER[src.kind]:
        bad("target is not a quotient/localization of the source")
    if src.kind is Kind.KPR:
        if dst.kind is not Kind.KPR or dst.n != src.n or dst.r > src.r:
            bad("K_{p^r}(n) only reduces to K_{p^r'}(n) with r' <= r")
    if src.kind is Kind.EN and dst.kind is not Kind.KPR and dst.kind is not Kind.EN:
        bad("E(n) reduces only to E(n) or K_{p^r}(n)")
    if src.kind is Kind.EN and dst.n != src.n:
        bad("height must agree")
    if src.kind is Kind.BP_MOD_I:
        if dst.kind is Kind.BP_MOD_I and dst.first < src.first:
            bad("cannot un-kill generators")
        if dst.kind is Kind.KPR and (dst.r != 1 or dst.n < src.first):
            bad("BP*/I_h maps only to K_p(n) with n >= h")
        if dst.kind is Kind.EN:
            bad("BP*/I_h does not map to E(n)")
    if dst.kind is Kind.RATIONAL and src.kind is not Kind.RATIONAL:
        bad("no map back to the rationals")
    if dst.kind is Kind.BP_MOD_I and src.kind not in (Kind.RATIONAL, Kind.BP, Kind.BP_MOD_I):
        bad("BP*/I_h is a quotient of BP* only")
    if src.laurent and dst.laurent and src.gens[-1] not in dst.gens:
        bad("inverted generator would be killed")


def reduce_coef(a: CoefElem, target: RingSpec) -> CoefElem:
    """Image of ``a`` under the canonical ring map to ``target``.

    Generators absent from the target are sent to 0; the coefficient is
    reduced into the target's coefficient domain.
    """
    src = a.spec
    _check_reduction(src, target)
    if src == target:
        return a
    pos = {k: i for i, k in enumerate(target.gens)}
    width = len(target.gens)
    out: dict = {}
    m = target.modulus
    for e, c in a.terms.items():
        new = [0] * width
        killed = False
        for k, x in zip(src.gens, e):
            if x == 0:
                continue
            if k in pos:
                new[pos[k]] = x
            elif x > 0:
                killed = True
                break
            else:
                raise IllegalReductionError(f"v{k} is inverted in the source but absent in the target")
        if killed:
            continue
        key = tuple(new)
        if not target._in_window(key):
            continue
        c = _coerce_named(target, c, src, e)
        out[key] = out.get(key, 0) + c
    if m is not None:
        out = {e: c % m for e, c in out.items()}
    return CoefElem._raw(target, {e: c for e, c in out.items() if c})


def _coerce_named(target: RingSpec, c, src: RingSpec, e):
    try:
        return target._coerce(c, e)
    except NonIntegralError:
        raise NonIntegralError(
            f"coefficient {c} of monomial {_mono_text(src, e)} is not {target.p}-integral; "
            f"cannot reduce into {target.describe()}") from None


def is_unit(a: CoefElem) -> bool:
    """Unit test in the m_0-local sense.

    KPR, EN: the reduction mod m_0 is a single Laurent monomial with unit
    coefficient.  BP, BP_MOD_I: constant term is a p-adic unit.  RATIONAL:
    nonzero constant term.
    """
    return a._unit_term() is not None
