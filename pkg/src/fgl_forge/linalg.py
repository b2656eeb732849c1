"""Exact kernels over Z/p^r (r = 1 gives F_p) by Smith-form elimination.

Z/p^r is a local principal ring, so an entry of minimal p-valuation divides
every other entry; pivoting on it and clearing its row and column yields the
diagonal form.  Column operations are tracked so kernels can be read back in
the original coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SmithForm", "smith_mod_pk", "kernel_mod_pk", "kernel_order_exponent", "apply_mod"]


def _val(x: int, p: int, r: int) -> int:
    if x == 0:
        return r
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class SmithForm:
    """P A V = diag(d) mod p^r.  ``valuations[i]`` is v_p(d_i) (r for zero)."""

    p: int
    r: int
    rows: int
    cols: int
    valuations: tuple[int, ...]
    V: np.ndarray


def smith_mod_pk(A, p: int, r: int) -> SmithForm:
    mod = p**r
    M = np.array(A, dtype=np.int64).reshape(len(A), -1) % mod if len(A) else np.zeros((0, 0), np.int64)
    rows, cols = M.shape
    V = np.eye(cols, dtype=np.int64)
    vals = []
    # valuation table of residues
    vtab = np.array([_val(x, p, r) for x in range(mod)], dtype=np.int64)
    for t in range(min(rows, cols)):
        sub = vtab[M[t:, t:]]
        k = int(sub.argmin())
        v = int(sub.flat[k])
        if v >= r:
            break
        i, j = divmod(k, cols - t)
        i += t
        j += t
        if i != t:
            M[[t, i]] = M[[i, t]]
        if j != t:
            M[:, [t, j]] = M[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
        a = int(M[t, t])
        unit = a // p**v
        uinv = pow(unit, -1, mod)
        # normalize pivot to p^v
        M[t] = (M[t] * uinv) % mod
        # clear the column below (row ops) and the row to the right (column ops)
        pv = p**v
        fr = M[t + 1:, t] // pv
        if fr.any():
            M[t + 1:] = (M[t + 1:] - fr[:, None] * M[t][None, :]) % mod
        fc = M[t, t + 1:] // pv
        if fc.any():
            M[:, t + 1:] = (M[:, t + 1:] - M[:, t][:, None] * fc[None, :]) % mod
            V[:, t + 1:] = (V[:, t + 1:] - V[:, t][:, None] * fc[None, :]) % mod
        vals.append(v)
    return SmithForm(p, r, rows, cols, tuple(vals), V)


def kernel_mod_pk(A, p: int, r: int, cols: int | None = None) -> list[list[int]]:
    """Generators of {x : A x = 0 mod p^r}; empty iff the map is injective.

    ``cols`` must be given when A has no rows.
    """
    if len(A) == 0:
        n = cols or 0
        return [[int(i == j) for i in range(n)] for j in range(n)]
    sf = smith_mod_pk(A, p, r)
    gens = []
    mod = p**r
    for i in range(sf.cols):
        v = sf.valuations[i] if i < len(sf.valuations) else r
        if v == 0:
            continue
        col = (sf.V[:, i] * p ** (r - v)) % mod
        gens.append([int(x) for x in col])
    return gens


def kernel_order_exponent(A, p: int, r: int, cols: int | None = None) -> int:
    """e with |ker A| = p^e."""
    if len(A) == 0:
        return r * (cols or 0)
    sf = smith_mod_pk(A, p, r)
    return sum(sf.valuations) + r * (sf.cols - len(sf.valuations))


def apply_mod(A, x, mod: int) -> list[int]:
    return [int(v) for v in (np.array(A, dtype=np.int64) @ np.array(x, dtype=np.int64)) % mod]
