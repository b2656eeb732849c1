"""Module presentations of R[[u]]/([l](u)) and R[[u]]/([l](u) - w) over R[[w]].

Write N = p^{sn} and split the relation series f = [l](u) as
f = f_low + u^N g with deg f_low < N.  Mod the maximal ideal m_0, f_low
vanishes and g(0) is a unit, so u^N = (w - f_low) g^{-1} lets any element be
rewritten in the basis 1, u, ..., u^{N-1}.  Every rewrite raises either the
w-degree or the m_0-adic valuation, so over Z/p^r (where m_0^r = 0) the
process stops; over E(n) it is capped at a user-visible lifting depth.

Since u^{N(r + T_w - 1)} lies in the ideal (f - w, w^{T_w}) over Z/p^r,
computing modulo u^{T_u} with T_u at least that large is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fgl import FormalGroupLaw, Provenance, build_law, l_series
from .linalg import kernel_mod_pk
from .ringcore import M0, CoefElem, Kind, is_unit, p_valuation
from .series import TruncationError, USeries, lowest_term

__all__ = [
    "CyclicGroupDatum",
    "ModulePresentation",
    "cohomology_of_Bmu",
    "leray_hirsch_presentation",
    "minimal_u_truncation",
]


@dataclass(frozen=True)
class CyclicGroupDatum:
    """l = p^s * l_prime with p not dividing l_prime."""

    l: int
    p: int
    s: int = field(init=False)
    l_prime: int = field(init=False)

    def __post_init__(self):
        if self.l <= 0:
            raise ValueError("the order of a cyclic group must be positive")
        s = p_valuation(self.l, self.p)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "l_prime", self.l // self.p**s)

    def rank(self, n: int) -> int:
        return self.p ** (self.s * n)


@dataclass
class ModulePresentation:
    """Free module with basis u^0..u^{N-1} over the base ring (possibly with w adjoined).

    ``u_power`` holds u^N in the basis: entry i is the w-series (a list of
    coefficients, length ``trunc_omega``) multiplying u^i.  ``action`` holds the
    multiplication matrices, entries being w-series as well; column j is the
    image of basis element j.
    """

    base: str
    basis: list[tuple[str, int]]
    u_power: list[list[CoefElem]]
    action: dict[str, list[list[list[CoefElem]]]]
    trunc_u: int
    trunc_omega: int
    lift_depth: int
    residual_zero: bool
    certificates: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def u_power_at_omega_zero(self) -> list[CoefElem]:
        return [s[0] for s in self.u_power]

    def to_json(self) -> dict:
        def ser(s):
            return [[a, c.to_text()] for a, c in enumerate(s) if c.terms]
        return {
            "base": self.base,
            "basis": [{"name": n, "degree": d} for n, d in self.basis],
            "rank": self.rank,
            "trunc": {"u": self.trunc_u, "omega": self.trunc_omega},
            "u_power_relation": [ser(s) for s in self.u_power],
            "action": {k: [[ser(e) for e in row] for row in m] for k, m in self.action.items()},
            "lift_depth": self.lift_depth,
            "residual_zero": self.residual_zero,
            "certificates": self.certificates,
        }

    def to_text(self) -> str:
        N = self.rank
        lines = [f"base: {self.base}",
                 f"basis: {', '.join(n for n, _ in self.basis)}  (rank {N})",
                 f"truncation: u^{self.trunc_u}, w^{self.trunc_omega}",
                 ("u" if N == 1 else f"u^{N}") + " = " + _basis_combo(self.u_power, self.trunc_omega)]
        for name, mat in self.action.items():
            lines.append(f"multiplication by {name}:")
            cells = [[_omega_text(e, self.trunc_omega) for e in row] for row in mat]
            width = max((len(c) for row in cells for c in row), default=1)
            for row in cells:
                lines.append("  [ " + "  ".join(c.rjust(width) for c in row) + " ]")
        for k, v in self.certificates.items():
            lines.append(f"certificate {k}: {v}")
        return "\n".join(lines)


def _omega_text(s: list[CoefElem], T: int) -> str:
    if not any(c.terms for c in s):
        return "0"
    if T == 1:
        return s[0].to_text()
    return USeries._raw(s[0].spec, len(s), s).to_text(with_order=False, var="w")


def _basis_combo(coeffs: list[list[CoefElem]], T: int) -> str:
    parts = []
    for i, s in enumerate(coeffs):
        if any(c.terms for c in s):
            mono = "1" if i == 0 else ("u" if i == 1 else f"u^{i}")
            parts.append(f"({_omega_text(s, T)})*{mono}")
    return " + ".join(parts) if parts else "0"


def minimal_u_truncation(r: int, N: int, trunc_omega: int) -> int:
    """Smallest T_u for which rewriting modulo u^{T_u} is exact over Z/p^r."""
    return max(N * (r + trunc_omega - 1), N + 1)


class _Residues:
    """Series over Z/p^r[v_n^{+-1}] with v_n -> 1: int64 arrays of length T.

    Coefficients are restored afterwards from their total degree, since a
    homogeneous coefficient of known degree is c * v_n^e with e forced.
    """

    def __init__(self, spec, T):
        self.spec, self.T, self.mod = spec, T, spec.modulus

    def lift(self, s: USeries):
        a = np.zeros(self.T, dtype=np.int64)
        for k, c in enumerate(s.coeffs[: self.T]):
            if c.terms:
                a[k] = c.specialize_vn().get((), 0)
        return a

    def zero(self):
        return np.zeros(self.T, dtype=np.int64)

    def mono(self, k):
        a = self.zero()
        if k < self.T:
            a[k] = 1
        return a

    def mul(self, a, b):
        return np.convolve(a, b)[: self.T] % self.mod

    def add(self, a, b):
        return (a + b) % self.mod

    def sub(self, a, b):
        return (a - b) % self.mod

    def is_zero(self, a):
        return not a.any()

    def coeff(self, a, i):
        return int(a[i])

    def split(self, a, N):
        """(low coefficients, high part divided by u^N)."""
        high = self.zero()
        high[: self.T - N] = a[N:]
        return a[:N], high

    def scalar_zero(self):
        return 0

    def scalar_add(self, x, y):
        return (x + y) % self.mod

    def residue_mod_m0(self, x):
        return x % self.spec.p

    def inverse(self, a):
        m = self.mod
        inv0 = pow(int(a[0]), -1, m)
        out = self.zero()
        out[0] = inv0
        for k in range(1, self.T):
            acc = int(np.dot(a[1 : k + 1], out[k - 1 :: -1][:k])) if k else 0
            out[k] = (-inv0 * acc) % m
        return out

    def to_coef(self, x, degree):
        """c * v_n^e of the given total degree."""
        if x == 0:
            return self.spec.zero()
        vdeg = self.spec.generator_degrees[-1]
        e, rem = divmod(degree, vdeg)
        if rem:
            raise ArithmeticError(f"nonzero residue in degree {degree}, not a multiple of |v_n|")
        return self.spec.monomial({self.spec.n: e}, x)


class _Exact:
    """USeries arithmetic with exact coefficients (used for E(n))."""

    def __init__(self, spec, T):
        self.spec, self.T = spec, T

    def lift(self, s: USeries):
        return _pad(s, self.T)

    def zero(self):
        return USeries.zero(self.spec, self.T)

    def mono(self, k):
        return USeries.monomial(self.spec, self.T, k) if k < self.T else self.zero()

    def mul(self, a, b):
        return a * b

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def is_zero(self, a):
        return a.is_zero()

    def coeff(self, a, i):
        return a.coeffs[i]

    def split(self, a, N):
        zero = self.spec.zero()
        return a.coeffs[:N], USeries._raw(self.spec, self.T, a.coeffs[N:] + [zero] * N)

    def scalar_zero(self):
        return self.spec.zero()

    def scalar_add(self, x, y):
        return x + y

    def residue_mod_m0(self, x):
        vals = x.mod_ideal(M0).specialize_vn()
        q = Fraction(sum(vals.values())) if vals else Fraction(0)
        p = self.spec.p
        return q.numerator * pow(q.denominator, -1, p) % p

    def inverse(self, a):
        return a ** -1

    def to_coef(self, x, degree):
        return x


def _pad(s: USeries, T: int) -> USeries:
    zero = s.spec.zero()
    return USeries._raw(s.spec, T, s.coeffs[:T] + [zero] * (T - min(s.trunc, T)))


@dataclass
class _Relation:
    B: object
    N: int
    f: object
    f_low: object
    ginv: object
    T_w: int
    max_rounds: int

    def reduce(self, h):
        """Rewrite h as sum_i c_i(w) u^i; returns (c[i][a], rounds, residual_zero)."""
        B, N, T_w = self.B, self.N, self.T_w
        out = [[B.scalar_zero()] * T_w for _ in range(N)]
        pending = {0: h}
        rounds = 0
        while pending and rounds <= self.max_rounds:
            nxt = {}
            for a, s in pending.items():
                low, high = B.split(s, N)
                for i in range(N):
                    out[i][a] = B.scalar_add(out[i][a], low[i])
                if B.is_zero(high):
                    continue
                q = B.mul(high, self.ginv)
                contrib = {a: B.sub(B.zero(), B.mul(self.f_low, q))}
                if a + 1 < T_w:
                    contrib[a + 1] = q
                for b, t in contrib.items():
                    if not B.is_zero(t):
                        nxt[b] = B.add(nxt[b], t) if b in nxt else t
            pending = nxt
            rounds += 1
        return out, rounds, not pending


def _relation(law: FormalGroupLaw, d: CyclicGroupDatum, T_u: int, T_w: int, max_depth: int):
    if law.provenance not in (Provenance.KPR, Provenance.EN):
        raise ValueError("cyclic-group presentations need a Kpr or En law")
    if d.p != law.spec.p:
        raise ValueError(f"datum at p={d.p}, law at p={law.spec.p}")
    spec = law.spec
    N = d.rank(spec.n)
    if T_w < 1:
        raise ValueError("w-truncation must be at least 1")
    if T_u <= N:
        raise TruncationError(f"T_u must exceed p^(sn) = {N}; minimal admissible T_u is {N + 1}")
    if spec.kind is Kind.KPR:
        need = minimal_u_truncation(spec.r, N, T_w)
        if T_u < need:
            raise TruncationError(
                f"rewriting is not exact at T_u={T_u}, T_w={T_w}; minimal sufficient T_u is {need}")
        B = _Residues(spec, T_u)
        max_rounds = spec.r + T_w
    else:
        B = _Exact(spec, T_u)
        max_rounds = max_depth
    if law.trunc != T_u:
        law = build_law(spec, T_u)
    fs = l_series(law, d.l)
    k, c = lowest_term(fs, M0)
    if k != N or not is_unit(c):
        raise ArithmeticError(f"relation [{d.l}](u) does not start at a unit multiple of u^{N} mod m_0")
    f = B.lift(fs)
    low, high = B.split(f, N)
    f_low = B.zero()
    for i in range(N):
        f_low = B.add(f_low, B.mul(B.mono(i), _scalar_series(B, low[i])))
    return fs, _Relation(B, N, f, f_low, B.inverse(high), T_w, max_rounds)


def _scalar_series(B, x):
    if isinstance(B, _Residues):
        a = B.zero()
        a[0] = x
        return a
    return USeries.monomial(B.spec, B.T, 0, x) if x.terms else B.zero()


def _coef_table(B, table, degree_of):
    return [[B.to_coef(x, degree_of(i, a)) for a, x in enumerate(row)] for i, row in enumerate(table)]


def _u_action(spec, N, T_w, u_power):
    zero = spec.zero()
    zero_s = [zero] * T_w
    one_s = [spec.one()] + [zero] * (T_w - 1)
    umat = [[zero_s for _ in range(N)] for _ in range(N)]
    for j in range(N - 1):
        umat[j + 1][j] = one_s
    for i in range(N):
        umat[i][N - 1] = list(u_power[i])
    return umat


def _nilpotency_index_mod_m0(B, N: int, raw_u_power) -> int | None:
    """Least e with M^e = 0 mod m_0, M the u-action at w = 0 (v_n -> 1, so over F_p)."""
    p = B.spec.p
    M = np.zeros((N, N), dtype=np.int64)
    for j in range(N - 1):
        M[j + 1, j] = 1
    for i in range(N):
        M[i, N - 1] = B.residue_mod_m0(raw_u_power[i][0])

    def power(e):
        R = np.eye(N, dtype=np.int64)
        P = M.copy()
        while e:
            if e & 1:
                R = (R @ P) % p
            P = (P @ P) % p
            e >>= 1
        return R

    if not power(N).any():
        if N == 1 or power(N - 1).any():
            return N
        P = M.copy()
        for e in range(1, N):
            if not P.any():
                return e
            P = (P @ M) % p
    return None


def _freeness_certificate(B, f, N: int) -> bool:
    """No nonzero c_0 + ... + c_{N-1} u^{N-1} lies in (f) mod u^T (over Z/p^r, v_n -> 1)."""
    T, mod = B.T, B.mod
    A = np.zeros((T, N + T), dtype=np.int64)
    A[np.arange(N), np.arange(N)] = 1
    for j in range(T):
        A[j:, N + j] = (-f[: T - j]) % mod
    gens = kernel_mod_pk(A, B.spec.p, B.spec.r, cols=N + T)
    return all(all(x == 0 for x in g[:N]) for g in gens)


def _basis(N):
    return [("1" if i == 0 else ("u" if i == 1 else f"u^{i}"), 2 * i) for i in range(N)]


def cohomology_of_Bmu(law: FormalGroupLaw, d: CyclicGroupDatum, T: int,
                      max_depth: int = 8) -> ModulePresentation:
    """R[[u]]/([l](u)) as a free R-module with basis 1, u, ..., u^{p^{sn}-1}."""
    spec = law.spec
    fs, rel = _relation(law, d, T, 1, max_depth)
    B, N = rel.B, rel.N
    raw, rounds, done = rel.reduce(B.mono(N))
    u_power = _coef_table(B, raw, lambda i, a: 2 * N - 2 * i - 2 * a)
    certs = {
        "relation_lowest_term": N,
        "rank": N,
        "u_nilpotency_index_mod_m0": _nilpotency_index_mod_m0(B, N, raw),
    }
    if spec.kind is Kind.KPR:
        certs["basis_independent"] = _freeness_certificate(B, rel.f, N)
    return ModulePresentation(
        base=spec.describe(),
        basis=_basis(N),
        u_power=u_power,
        action={"u": _u_action(spec, N, 1, u_power)},
        trunc_u=T,
        trunc_omega=1,
        lift_depth=rounds,
        residual_zero=done,
        certificates=certs,
    )


def leray_hirsch_presentation(law: FormalGroupLaw, d: CyclicGroupDatum, T_u: int, T_omega: int,
                              max_depth: int = 8) -> ModulePresentation:
    """R[[u]] with [l](u) = w imposed, as a free R[[w]]/(w^{T_w})-module."""
    if T_omega < 2:
        raise ValueError("the w-truncation must be at least 2")
    spec = law.spec
    fs, rel = _relation(law, d, T_u, T_omega, max_depth)
    B, N = rel.B, rel.N
    raw, rounds, done = rel.reduce(B.mono(N))
    u_power = _coef_table(B, raw, lambda i, a: 2 * N - 2 * i - 2 * a)

    def is_zero_scalar(x):
        return x == 0 if isinstance(B, _Residues) else not x.terms

    # powers of w pulled back along w -> f(u) reduce to w^a * 1: the base splits off
    split = True
    fpow = B.mono(0)
    fpows = []
    for a in range(T_omega):
        fpows.append(fpow)
        red, _, ok = rel.reduce(fpow)
        for i in range(N):
            for b in range(T_omega):
                want_one = i == 0 and b == a
                x = red[i][b]
                if want_one != (not is_zero_scalar(x)) or (want_one and B.to_coef(x, 0) != spec.one()):
                    split = False
        split = split and ok
        fpow = B.mul(fpow, rel.f)
    # w acts diagonally: w * u^j = f(u) u^j rewritten
    wmat = [[None] * N for _ in range(N)]
    for j in range(N):
        red, _, _ = rel.reduce(B.mul(rel.f, B.mono(j)))
        for i in range(N):
            wmat[i][j] = [B.to_coef(x, 2 * j + 2 - 2 * i - 2 * a) for a, x in enumerate(red[i])]
    # substitute w -> f(u) back into the expression for u^N
    back = B.zero()
    for i in range(N):
        for a in range(T_omega):
            x = raw[i][a]
            if not is_zero_scalar(x):
                back = B.add(back, B.mul(B.mul(fpows[a], B.mono(i)), _scalar_series(B, x)))
    diff = B.sub(back, B.mono(N))
    red, _, ok = rel.reduce(diff)
    tautological = ok and all(is_zero_scalar(x) for row in red for x in row)
    bmu = cohomology_of_Bmu(law, d, T_u, max_depth=max_depth)
    coherent = bmu.u_power_at_omega_zero() == [s[0] for s in u_power]
    certs = {
        "rank": N,
        "omega_zero_coherent": coherent,
        "base_split_injective": split,
        "tautological_relation": tautological,
    }
    return ModulePresentation(
        base=f"{spec.describe()}[[w]]/(w^{T_omega})",
        basis=_basis(N),
        u_power=u_power,
        action={"u": _u_action(spec, N, T_omega, u_power), "w": wmat},
        trunc_u=T_u,
        trunc_omega=T_omega,
        lift_depth=rounds,
        residual_zero=done,
        certificates=certs,
    )
