"""Exact linear algebra over Z/p^s.

Matrices carry their modulus (p, s) with entries stored as canonical
representatives in [0, p^s).  The workhorse is a Smith normal form adapted
to the local ring Z/p^s: pivots are chosen by minimal p-adic valuation, so
the diagonal consists of p-powers (units normalized to 1) with a divisibility
chain.  Kernels, cokernels and module profiles are all derived from it.

Finite modules are presented as cokernels of relation matrices
(PresentedModule); their isomorphism class is captured by the list of
p-power elementary divisors (module_profile).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ZModMatrix",
    "SmithForm",
    "PresentedModule",
    "smith_normal_form",
    "kernel_cokernel",
    "module_profile",
    "solve",
]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class ZModMatrix:
    """Matrix over Z/p^s with canonical entries in [0, p^s)."""

    __slots__ = ("p", "s", "rows", "cols", "entries")

    def __init__(self, p: int, s: int, entries):
        if not _is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if s < 1:
            raise ValueError(f"s = {s} must be positive")
        self.p = p
        self.s = s
        q = p**s
        a = np.array(entries, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("entries must be two-dimensional")
        self.entries = np.mod(a, q)
        self.rows, self.cols = self.entries.shape

    @property
    def modulus(self) -> int:
        return self.p**self.s

    @classmethod
    def identity(cls, p: int, s: int, n: int) -> "ZModMatrix":
        return cls(p, s, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, p: int, s: int, rows: int, cols: int) -> "ZModMatrix":
        return cls(p, s, np.zeros((rows, cols), dtype=np.int64))

    def copy(self) -> "ZModMatrix":
        return ZModMatrix(self.p, self.s, self.entries.copy())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ZModMatrix)
            and self.p == other.p
            and self.s == other.s
            and self.entries.shape == other.entries.shape
            and bool(np.array_equal(self.entries, other.entries))
        )

    def __hash__(self):
        return hash((self.p, self.s, self.entries.tobytes()))

    def __matmul__(self, other: "ZModMatrix") -> "ZModMatrix":
        self._check_ring(other)
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in product")
        prod = (self.entries.astype(object) @ other.entries.astype(object)) % self.modulus
        return ZModMatrix(self.p, self.s, prod.astype(np.int64))

    def __add__(self, other: "ZModMatrix") -> "ZModMatrix":
        self._check_ring(other)
        return ZModMatrix(self.p, self.s, self.entries + other.entries)

    def __sub__(self, other: "ZModMatrix") -> "ZModMatrix":
        self._check_ring(other)
        return ZModMatrix(self.p, self.s, self.entries - other.entries)

    def __neg__(self) -> "ZModMatrix":
        return ZModMatrix(self.p, self.s, -self.entries)

    def scale(self, c: int) -> "ZModMatrix":
        return ZModMatrix(self.p, self.s, self.entries * (c % self.modulus))

    def transpose(self) -> "ZModMatrix":
        return ZModMatrix(self.p, self.s, self.entries.T)

    def _check_ring(self, other: "ZModMatrix") -> None:
        if self.p != other.p or self.s != other.s:
            raise ValueError("matrices over different rings")

    def is_zero(self) -> bool:
        return not self.entries.any()

    def valuation(self, value: int) -> int:
        """p-adic valuation of a residue, capped at s (v(0) = s)."""
        v = 0
        value %= self.modulus
        if value == 0:
            return self.s
        while value % self.p == 0:
            value //= self.p
            v += 1
        return v

    def to_json(self) -> str:
        return json.dumps(
            {"p": self.p, "s": self.s, "entries": self.entries.tolist()},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ZModMatrix":
        data = json.loads(text)
        return cls(data["p"], data["s"], data["entries"])

    def __repr__(self):
        return f"ZModMatrix(p={self.p}, s={self.s}, {self.entries.tolist()})"


@dataclass(frozen=True)
class SmithForm:
    """D = U @ A @ V with D diagonal (p-powers/units) and U, V unimodular."""

    D: ZModMatrix
    U: ZModMatrix
    V: ZModMatrix

    @property
    def diagonal(self) -> list[int]:
        d = self.D
        return [int(d.entries[i, i]) for i in range(min(d.rows, d.cols))]

    @property
    def valuations(self) -> list[int]:
        """Valuations of the diagonal entries (s meaning the entry is 0)."""
        return [self.D.valuation(x) for x in self.diagonal]

    @property
    def rank_profile(self) -> list[int]:
        """Valuations of the nonzero diagonal entries."""
        return [v for v in self.valuations if v < self.D.s]


@dataclass(frozen=True)
class PresentedModule:
    """Finite Z/p^s-module given as coker of a relation matrix."""

    relations: ZModMatrix
    generators: int

    def __post_init__(self):
        if self.relations.rows != self.generators:
            raise ValueError("relation matrix rows must equal generator count")

    @property
    def p(self) -> int:
        return self.relations.p

    @property
    def s(self) -> int:
        return self.relations.s

    @classmethod
    def free(cls, p: int, s: int, n: int) -> "PresentedModule":
        return cls(ZModMatrix.zeros(p, s, n, 1), n)

    @classmethod
    def from_divisors(cls, p: int, s: int, divisors: list[int]) -> "PresentedModule":
        n = len(divisors)
        if n == 0:
            return cls(ZModMatrix.zeros(p, s, 0, 1), 0)
        rel = np.zeros((n, n), dtype=np.int64)
        for i, d in enumerate(divisors):
            rel[i, i] = d % (p**s)  # Z/p^s / (d) = Z/d since d | p^s
        return cls(ZModMatrix(p, s, rel), n)

    def profile(self) -> list[int]:
        return module_profile(self)

    def length(self) -> int:
        """p-adic length: sum of exponents of the elementary divisors."""
        total = 0
        for d in self.profile():
            e = 0
            while d > 1:
                d //= self.p
                e += 1
            total += e
        return total

    def is_zero(self) -> bool:
        return self.length() == 0


def _unit_inverse(a: int, q: int) -> int:
    return pow(a, -1, q)


def smith_normal_form(A: ZModMatrix) -> SmithForm:
    """Smith normal form over Z/p^s by minimal-valuation pivoting.

    Returns D = U @ A @ V with diagonal entries that are p-powers (units
    normalized to 1), each dividing the next, and U, V invertible.
    """
    p, s, q = A.p, A.s, A.modulus
    M = A.entries.astype(object).copy()
    rows, cols = M.shape
    U = np.eye(rows, dtype=object)
    V = np.eye(cols, dtype=object)

    # precompute valuation table lazily via helper
    def val(x: int) -> int:
        x %= q
        if x == 0:
            return s
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v

    n = min(rows, cols)
    for k in range(n):
        # locate minimal-valuation entry in the trailing block
        best = None
        best_v = s
        for i in range(k, rows):
            for j in range(k, cols):
                v = val(M[i, j])
                if v < best_v:
                    best_v, best = v, (i, j)
                    if v == 0:
                        break
            if best_v == 0:
                break
        if best is None:
            break  # trailing block is zero
        bi, bj = best
        if bi != k:
            M[[k, bi]] = M[[bi, k]]
            U[[k, bi]] = U[[bi, k]]
        if bj != k:
            M[:, [k, bj]] = M[:, [bj, k]]
            V[:, [k, bj]] = V[:, [bj, k]]
        piv = int(M[k, k]) % q
        unit = piv // (p**best_v)
        inv = _unit_inverse(unit, q)
        # normalize pivot to a pure p-power
        M[k, :] = (M[k, :] * inv) % q
        U[k, :] = (U[k, :] * inv) % q
        pk = p**best_v
        # clear column and row; every entry has valuation >= best_v
        for i in range(rows):
            if i != k and M[i, k] % q:
                f = (int(M[i, k]) // pk) % q
                M[i, :] = (M[i, :] - f * M[k, :]) % q
                U[i, :] = (U[i, :] - f * U[k, :]) % q
        for j in range(cols):
            if j != k and M[k, j] % q:
                f = (int(M[k, j]) // pk) % q
                M[:, j] = (M[:, j] - f * M[:, k]) % q
                V[:, j] = (V[:, j] - f * V[:, k]) % q

    D = ZModMatrix(A.p, A.s, M.astype(np.int64))
    return SmithForm(D, ZModMatrix(A.p, A.s, U.astype(np.int64)),
                     ZModMatrix(A.p, A.s, V.astype(np.int64)))


def kernel_cokernel(A: ZModMatrix) -> tuple[PresentedModule, PresentedModule]:
    """Presentations of ker(A) and coker(A).

    With D = U A V, ker(A) is spanned by V @ (p^(s-v_i) e_i) for diagonal
    valuations v_i > 0 plus the free columns, giving
    ker ~ (+) Z/p^(v_i) (+) (Z/p^s)^free; coker(A) ~ (+) Z/p^(v_i) over the
    diagonal positions plus free rows.
    """
    sf = smith_normal_form(A)
    p, s = A.p, A.s
    vals = sf.valuations
    ndiag = len(vals)

    ker_div = [p**v for v in vals if 0 < v] + [p**s] * (A.cols - ndiag)
    ker_div = [d for d in ker_div if d > 1]
    coker_div = [p ** min(v, s) for v in vals if v > 0] + [p**s] * (A.rows - ndiag)
    coker_div = [d for d in coker_div if d > 1]

    return (
        PresentedModule.from_divisors(p, s, sorted(ker_div)),
        PresentedModule.from_divisors(p, s, sorted(coker_div)),
    )


def kernel_generators(A: ZModMatrix) -> ZModMatrix:
    """Columns generating ker(A) as a submodule of (Z/p^s)^cols."""
    sf = smith_normal_form(A)
    p, s = A.p, A.s
    vals = sf.valuations
    gens = []
    for i, v in enumerate(vals):
        if v > 0:
            e = np.zeros(A.cols, dtype=np.int64)
            e[i] = p ** (s - v)
            gens.append(e)
    for j in range(len(vals), A.cols):
        e = np.zeros(A.cols, dtype=np.int64)
        e[j] = 1
        gens.append(e)
    if not gens:
        return ZModMatrix.zeros(p, s, A.cols, 0)
    G = np.stack(gens, axis=1)
    return sf.V @ ZModMatrix(p, s, G)


def module_profile(M: PresentedModule) -> list[int]:
    """Elementary divisors (p-powers > 1) of coker(relations), ascending."""
    p, s = M.p, M.s
    if M.generators == 0:
        return []
    sf = smith_normal_form(M.relations)
    vals = sf.valuations
    divisors = [p ** min(v, s) for v in vals if v > 0]
    divisors += [p**s] * (M.generators - len(vals))
    return sorted(d for d in divisors if d > 1)


def image_length(A: ZModMatrix) -> int:
    """p-adic length of the column space of A."""
    sf = smith_normal_form(A)
    return sum(A.s - v for v in sf.valuations if v < A.s)


def solve(A: ZModMatrix, b) -> np.ndarray | None:
    """One solution x of A x = b over Z/p^s, or None if inconsistent."""
    q = A.modulus
    sf = smith_normal_form(A)
    c = (sf.U.entries.astype(object) @ np.array(b, dtype=object)) % q
    y = np.zeros(A.cols, dtype=object)
    vals = sf.valuations
    for i in range(A.rows):
        ci = int(c[i]) % q
        if i < len(vals) and vals[i] < A.s:
            d = A.p ** vals[i]
            if ci % d:
                return None
            y[i] = ci // d
        elif ci:
            return None
    x = (sf.V.entries.astype(object) @ y) % q
    return x.astype(np.int64)
