"""Homological machinery over finite Z/p^s-modules.

Bounded cochain complexes of free Z/p^s-modules with exact Smith-form
cohomology, mapping cones and their long exact sequences, first-quadrant
double complexes with column-filtration spectral pages checked against the
total complex, and lim/lim^1 of finitely stored towers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .zmodlin import (
    PresentedModule,
    ZModMatrix,
    image_length,
    kernel_cokernel,
    kernel_generators,
    module_profile,
)

__all__ = [
    "ChainComplexZ",
    "ChainMap",
    "ShortExactSequence",
    "DoubleComplex",
    "SpectralPage",
    "Tower",
    "mapping_cone",
    "cone_sequence",
    "les_check",
    "total_complex",
    "spectral_E_pages",
    "tower_lim_lim1",
    "subquotient_presentation",
]


def _hstack(p, s, mats):
    cols = [m.entries for m in mats if m.cols]
    if not cols:
        return ZModMatrix.zeros(p, s, mats[0].rows, 0)
    return ZModMatrix(p, s, np.hstack(cols))


def subquotient_presentation(span: ZModMatrix,
                             sub: ZModMatrix) -> PresentedModule:
    """span(Z)/span(B) presented on the columns of Z; requires B ⊆ Z."""
    p, s = span.p, span.s
    if sub.cols:
        if image_length(_hstack(p, s, [span, sub])) != image_length(span):
            raise InvariantError("denominator is not contained in the span")
    paired = _hstack(p, s, [span, sub.scale(-1)]) if sub.cols else span
    rel = kernel_generators(paired)
    top = ZModMatrix(p, s, rel.entries[: span.cols]) if rel.cols else \
        ZModMatrix.zeros(p, s, span.cols, 0)
    return PresentedModule(top, span.cols)


# -- chain complexes ---------------------------------------------------------


class ChainComplexZ:
    """Bounded cochain complex of free Z/p^s-modules; d^2 = 0 certified."""

    def __init__(self, p: int, s: int, ranks: dict, diffs: dict):
        self.p, self.s = p, s
        self.ranks = {int(n): int(r) for n, r in ranks.items() if r}
        self.diffs = {}
        for n, d in diffs.items():
            n = int(n)
            if not isinstance(d, ZModMatrix):
                d = ZModMatrix(p, s, d)
            if d.cols != self.rank(n) or d.rows != self.rank(n + 1):
                raise InvariantError(
                    f"differential at degree {n} has the wrong shape")
            if d.entries.any():
                self.diffs[n] = d
        for n in list(self.diffs):
            if n + 1 in self.diffs:
                if not (self.diffs[n + 1] @ self.diffs[n]).is_zero():
                    raise InvariantError(
                        f"d^2 != 0 between degrees {n} and {n + 2}")

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def degrees(self):
        degs = set(self.ranks)
        return range(min(degs), max(degs) + 1) if degs else range(0)

    def diff(self, n: int) -> ZModMatrix:
        if n in self.diffs:
            return self.diffs[n]
        return ZModMatrix.zeros(self.p, self.s, self.rank(n + 1),
                                self.rank(n))

    def cocycles(self, n: int) -> ZModMatrix:
        """Columns generating ker d_n."""
        return kernel_generators(self.diff(n))

    def coboundaries(self, n: int) -> ZModMatrix:
        """Columns generating im d_{n-1}."""
        return self.diff(n - 1)

    def cohomology(self, n: int) -> PresentedModule:
        return subquotient_presentation(self.cocycles(n),
                                        self.coboundaries(n))

    def cohomology_profile(self, n: int) -> list:
        return module_profile(self.cohomology(n))

    def cohomology_length(self, n: int) -> int:
        return self.cohomology(n).length()

    def shifted(self, k: int = 1) -> "ChainComplexZ":
        """Degree shift without signs: degree n holds the old degree n-k
        with the same differential matrices."""
        ranks = {n + k: r for n, r in self.ranks.items()}
        diffs = {n + k: d for n, d in self.diffs.items()}
        return ChainComplexZ(self.p, self.s, ranks, diffs)

    def to_json(self) -> str:
        return json.dumps({
            "format": "chain-complex",
            "p": self.p, "s": self.s,
            "ranks": {str(n): r for n, r in sorted(self.ranks.items())},
            "diffs": {str(n): d.entries.tolist()
                      for n, d in sorted(self.diffs.items())},
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChainComplexZ":
        doc = json.loads(text)
        if doc.get("format") != "chain-complex":
            raise ValueError("not a chain-complex document")
        return cls(doc["p"], doc["s"], doc["ranks"], doc["diffs"])


class ChainMap:
    """Degreewise matrices commuting with the differentials."""

    def __init__(self, src: ChainComplexZ, dst: ChainComplexZ, blocks: dict):
        if (src.p, src.s) != (dst.p, dst.s):
            raise InvariantError("chain map between different rings")
        self.src, self.dst = src, dst
        self.blocks = {}
        for n, f in blocks.items():
            n = int(n)
            if not isinstance(f, ZModMatrix):
                f = ZModMatrix(src.p, src.s, f)
            if f.cols != src.rank(n) or f.rows != dst.rank(n):
                raise InvariantError(f"map block at degree {n} is misshaped")
            if f.entries.any():
                self.blocks[n] = f
        for n in self.src.degrees():
            lhs = dst.diff(n) @ self.block(n)
            rhs = self.block(n + 1) @ src.diff(n)
            if not (lhs - rhs).is_zero():
                raise InvariantError(
                    f"not a chain map: square at degree {n} does not commute")

    def block(self, n: int) -> ZModMatrix:
        if n in self.blocks:
            return self.blocks[n]
        return ZModMatrix.zeros(self.src.p, self.src.s, self.dst.rank(n),
                                self.src.rank(n))


def mapping_cone(f: ChainMap) -> ChainComplexZ:
    """Cone T^n = dst^{n-1} ⊕ src^n with d(α, β) = (dα + (-1)^n f β, dβ),
    n the target degree, so dst (in shifted degrees) includes as a
    subcomplex and src is the quotient, termwise split."""
    X, Y = f.src, f.dst
    p, s = X.p, X.s
    degs = sorted(set(X.ranks) | {n + 1 for n in Y.ranks})
    ranks = {n: Y.rank(n - 1) + X.rank(n) for n in degs}
    diffs = {}
    for n in degs:
        rows = Y.rank(n) + X.rank(n + 1)
        cols = ranks[n]
        if not rows or not cols:
            continue
        d = np.zeros((rows, cols), dtype=np.int64)
        ry = Y.rank(n)
        cy = Y.rank(n - 1)
        d[:ry, :cy] = Y.diff(n - 1).entries
        d[:ry, cy:] = (-1) ** (n + 1) * f.block(n).entries
        d[ry:, cy:] = X.diff(n).entries
        diffs[n] = ZModMatrix(p, s, d)
    return ChainComplexZ(p, s, ranks, diffs)


@dataclass
class ShortExactSequence:
    """Termwise split exact 0 → A → B → C → 0 with the splitting data.

    inc: A^n → B^n, proj: B^n → C^n, retr: B^n → A^n, sect: C^n → B^n
    satisfying proj∘inc = 0, retr∘inc = 1, proj∘sect = 1,
    inc∘retr + sect∘proj = 1 degreewise; inc and proj are chain maps.
    """

    A: ChainComplexZ
    B: ChainComplexZ
    C: ChainComplexZ
    inc: dict
    proj: dict
    retr: dict
    sect: dict

    def __post_init__(self):
        p, s = self.B.p, self.B.s
        for table in (self.inc, self.proj, self.retr, self.sect):
            for n in list(table):
                if not isinstance(table[n], ZModMatrix):
                    table[n] = ZModMatrix(p, s, table[n])
        for n in self.B.degrees():
            i = self.mat(self.inc, n, self.A, self.B)
            pr = self.mat(self.proj, n, self.B, self.C)
            r = self.mat(self.retr, n, self.B, self.A)
            se = self.mat(self.sect, n, self.C, self.B)
            if not (pr @ i).is_zero():
                raise InvariantError("proj ∘ inc != 0")
            if not (r @ i - ZModMatrix.identity(p, s, self.A.rank(n))
                    ).is_zero():
                raise InvariantError("retr ∘ inc != 1")
            if not (pr @ se - ZModMatrix.identity(p, s, self.C.rank(n))
                    ).is_zero():
                raise InvariantError("proj ∘ sect != 1")
            if not (i @ r + se @ pr
                    - ZModMatrix.identity(p, s, self.B.rank(n))).is_zero():
                raise InvariantError("splitting does not sum to the identity")
        ChainMap(self.A, self.B, dict(self.inc))
        ChainMap(self.B, self.C, dict(self.proj))

    @staticmethod
    def mat(table, n, src, dst):
        if n in table:
            return table[n]
        return ZModMatrix.zeros(src.p, src.s, dst.rank(n), src.rank(n))


def cone_sequence(f: ChainMap) -> ShortExactSequence:
    """The termwise split sequence dst-part → Cone(f) → src."""
    T = mapping_cone(f)
    X, Y = f.src, f.dst
    p, s = X.p, X.s
    A = Y.shifted(1)
    inc, proj, retr, sect = {}, {}, {}, {}
    for n in T.degrees():
        ry, rx = Y.rank(n - 1), X.rank(n)
        if not ry + rx:
            continue
        i = np.zeros((ry + rx, ry), dtype=np.int64)
        i[:ry] = np.eye(ry, dtype=np.int64)
        pr = np.zeros((rx, ry + rx), dtype=np.int64)
        pr[:, ry:] = np.eye(rx, dtype=np.int64)
        inc[n] = ZModMatrix(p, s, i)
        proj[n] = ZModMatrix(p, s, pr)
        retr[n] = inc[n].transpose()
        sect[n] = proj[n].transpose()
    return ShortExactSequence(A, T, X, inc, proj, retr, sect)


def _induced_image_length(gens: ZModMatrix, bnd: ZModMatrix) -> int:
    """Length of (span(gens) + span(bnd)) / span(bnd)."""
    p, s = gens.p, gens.s
    return image_length(_hstack(p, s, [gens, bnd])) - image_length(bnd)


def les_check(ses: ShortExactSequence) -> dict:
    """Exactness of the long cohomology sequence at every node.

    At each node the incoming image is compared with the outgoing kernel
    by exact length bookkeeping over the Smith form; the connecting map
    is computed on cocycle generators (lift by the section, apply the
    middle differential, pull back by the retraction) and its landing in
    the cocycles is certified.  The first failing node is reported.
    """
    A, B, C = ses.A, ses.B, ses.C
    p, s = B.p, B.s
    degs = sorted(set(A.ranks) | set(B.ranks) | set(C.ranks))
    if not degs:
        return {"exact": True, "nodes": 0, "first_failure": None}
    lo, hi = degs[0] - 1, degs[-1] + 1
    data = {}
    for n in range(lo, hi + 2):
        i_n = ses.mat(ses.inc, n, A, B)
        p_n = ses.mat(ses.proj, n, B, C)
        r_n1 = ses.mat(ses.retr, n + 1, B, A)
        s_n = ses.mat(ses.sect, n, C, B)
        ZA, ZB, ZC = A.cocycles(n), B.cocycles(n), C.cocycles(n)
        BB, BC = B.coboundaries(n), C.coboundaries(n)
        im_i = _induced_image_length(i_n @ ZA, BB)
        im_p = _induced_image_length(p_n @ ZB, BC)
        delta_gens = r_n1 @ (B.diff(n) @ (s_n @ ZC))
        im_d = _induced_image_length(delta_gens, A.coboundaries(n + 1))
        hA = A.cohomology_length(n)
        hB = B.cohomology_length(n)
        hC = C.cohomology_length(n)
        data[n] = (im_i, im_p, im_d, hA, hB, hC, delta_gens)
    checked = 0
    for n in range(lo, hi + 1):
        im_i, im_p, im_d, hA, hB, hC, dg = data[n]
        za1 = A.cocycles(n + 1)
        if image_length(_hstack(p, s, [za1, dg])) != image_length(za1):
            return {"exact": False, "nodes": checked,
                    "first_failure": (f"delta at degree {n}",
                                      "image is not made of cocycles")}
        nodes = (
            (f"H^{n}(B)", im_i, hB - im_p),
            (f"H^{n}(C)", im_p, hC - im_d),
            (f"H^{n + 1}(A)", im_d, data[n + 1][3] - data[n + 1][0]),
        )
        for label, im, ker in nodes:
            checked += 1
            if im != ker:
                return {"exact": False, "nodes": checked,
                        "first_failure": (label, im, ker)}
    return {"exact": True, "nodes": checked, "first_failure": None}


# -- double complexes and spectral pages -------------------------------------


class DoubleComplex:
    """Bounded first-quadrant grid with anticommuting differentials
    (d_h d_v + d_v d_h = 0); the total differential is d_h + d_v."""

    def __init__(self, p: int, s: int, ranks: dict, dh: dict, dv: dict):
        self.p, self.s = p, s
        self.ranks = {}
        for key, r in ranks.items():
            pq = self._key(key)
            if pq[0] < 0 or pq[1] < 0:
                raise InvariantError("grid must be first-quadrant")
            if r:
                self.ranks[pq] = int(r)
        self.dh = {self._key(k): self._mat(v) for k, v in dh.items()}
        self.dv = {self._key(k): self._mat(v) for k, v in dv.items()}
        for (pp, qq), m in self.dh.items():
            if m.cols != self.rank(pp, qq) or m.rows != self.rank(pp + 1, qq):
                raise InvariantError(f"d_h at {(pp, qq)} is misshaped")
        for (pp, qq), m in self.dv.items():
            if m.cols != self.rank(pp, qq) or m.rows != self.rank(pp, qq + 1):
                raise InvariantError(f"d_v at {(pp, qq)} is misshaped")
        for pq in self.ranks:
            pp, qq = pq
            if not (self.d_h(pp + 1, qq) @ self.d_h(pp, qq)).is_zero():
                raise InvariantError(f"d_h^2 != 0 at {pq}")
            if not (self.d_v(pp, qq + 1) @ self.d_v(pp, qq)).is_zero():
                raise InvariantError(f"d_v^2 != 0 at {pq}")
            anti = self.d_v(pp + 1, qq) @ self.d_h(pp, qq) + \
                self.d_h(pp, qq + 1) @ self.d_v(pp, qq)
            if not anti.is_zero():
                raise InvariantError(
                    f"differentials do not anticommute at {pq}")

    @staticmethod
    def _key(key):
        if isinstance(key, str):
            a, b = key.split(",")
            return (int(a), int(b))
        return (int(key[0]), int(key[1]))

    def _mat(self, v):
        return v if isinstance(v, ZModMatrix) else ZModMatrix(self.p,
                                                              self.s, v)

    def rank(self, pp: int, qq: int) -> int:
        return self.ranks.get((pp, qq), 0)

    def d_h(self, pp: int, qq: int) -> ZModMatrix:
        if (pp, qq) in self.dh:
            return self.dh[(pp, qq)]
        return ZModMatrix.zeros(self.p, self.s, self.rank(pp + 1, qq),
                                self.rank(pp, qq))

    def d_v(self, pp: int, qq: int) -> ZModMatrix:
        if (pp, qq) in self.dv:
            return self.dv[(pp, qq)]
        return ZModMatrix.zeros(self.p, self.s, self.rank(pp, qq + 1),
                                self.rank(pp, qq))

    def extent(self):
        if not self.ranks:
            return 0, 0
        return (max(pp for pp, _ in self.ranks) + 1,
                max(qq for _, qq in self.ranks) + 1)

    def to_json(self) -> str:
        return json.dumps({
            "format": "double-complex",
            "p": self.p, "s": self.s,
            "ranks": {f"{pp},{qq}": r
                      for (pp, qq), r in sorted(self.ranks.items())},
            "dh": {f"{pp},{qq}": m.entries.tolist()
                   for (pp, qq), m in sorted(self.dh.items())},
            "dv": {f"{pp},{qq}": m.entries.tolist()
                   for (pp, qq), m in sorted(self.dv.items())},
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DoubleComplex":
        doc = json.loads(text)
        if doc.get("format") != "double-complex":
            raise ValueError("not a double-complex document")
        return cls(doc["p"], doc["s"], doc["ranks"], doc["dh"], doc["dv"])


def total_complex(DC: DoubleComplex) -> ChainComplexZ:
    """Tot^n = ⊕_{p+q=n} C^{p,q} with differential d_h + d_v."""
    W, H = DC.extent()
    ranks, offsets = {}, {}
    for n in range(W + H - 1):
        off, total = {}, 0
        for pp in range(max(0, n - H + 1), min(W, n + 1)):
            if DC.rank(pp, n - pp):
                off[(pp, n - pp)] = total
                total += DC.rank(pp, n - pp)
        if total:
            ranks[n] = total
            offsets[n] = off
    diffs = {}
    for n, off in offsets.items():
        if n + 1 not in offsets:
            continue
        d = np.zeros((ranks[n + 1], ranks[n]), dtype=np.int64)
        off2 = offsets[n + 1]
        for (pp, qq), c0 in off.items():
            r = DC.rank(pp, qq)
            if (pp + 1, qq) in off2:
                r0 = off2[(pp + 1, qq)]
                d[r0:r0 + DC.rank(pp + 1, qq), c0:c0 + r] += \
                    DC.d_h(pp, qq).entries
            if (pp, qq + 1) in off2:
                r0 = off2[(pp, qq + 1)]
                d[r0:r0 + DC.rank(pp, qq + 1), c0:c0 + r] += \
                    DC.d_v(pp, qq).entries
        diffs[n] = ZModMatrix(DC.p, DC.s, d)
    return ChainComplexZ(DC.p, DC.s, ranks, diffs)


@dataclass
class SpectralPage:
    """One page of the column-filtration spectral sequence: Smith profiles
    and lengths of E_r^{p,q}, plus the length of each d_r image measured
    inside the target spot (keyed by the source spot)."""

    r: int
    profiles: dict
    lengths: dict
    d_lengths: dict

    def length(self, pp: int, qq: int) -> int:
        return self.lengths.get((pp, qq), 0)


def _window_kernel(DC: DoubleComplex, cols_idx, rows_idx):
    """Kernel generators for the total-differential constraints carrying
    the listed column spots into the listed row spots."""
    p, s = DC.p, DC.s
    sizes = [DC.rank(*pq) for pq in cols_idx]
    row_sizes = [DC.rank(*pq) for pq in rows_idx]
    M = np.zeros((sum(row_sizes), sum(sizes)), dtype=np.int64)
    roff = np.cumsum([0] + row_sizes)
    coff = np.cumsum([0] + sizes)
    for j, (cp, cq) in enumerate(cols_idx):
        for i, (rp, rq) in enumerate(rows_idx):
            if (rp, rq) == (cp, cq + 1):
                blk = DC.d_v(cp, cq).entries
            elif (rp, rq) == (cp + 1, cq):
                blk = DC.d_h(cp, cq).entries
            else:
                continue
            M[roff[i]:roff[i + 1], coff[j]:coff[j + 1]] = blk
    return kernel_generators(ZModMatrix(p, s, M)), coff


def _mul(p, s, a: np.ndarray, b: np.ndarray) -> ZModMatrix:
    if a.size and b.size:
        out = (a.astype(object) @ b.astype(object)) % p ** s
    else:
        out = np.zeros((a.shape[0], b.shape[1]), dtype=object)
    return ZModMatrix(p, s, out.astype(np.int64))


def _zr_span(DC: DoubleComplex, pp: int, qq: int, r: int):
    """Leading components of x ∈ F_p Tot with dx ∈ F_{p+r}, and the d_r
    values d_h(x_{p+r-1}) of the same generating solutions."""
    p, s = DC.p, DC.s
    tgt_rank = DC.rank(pp + r, qq - r + 1)
    cols_idx = [(pp + t, qq - t) for t in range(r)
                if qq - t >= 0 and DC.rank(pp + t, qq - t)]
    rows_idx = [(pp + t, qq - t + 1) for t in range(r)
                if DC.rank(pp + t, qq - t + 1)]
    K, coff = _window_kernel(DC, cols_idx, rows_idx)
    lead = ZModMatrix(p, s, K.entries[: DC.rank(pp, qq)])
    last = (pp + r - 1, qq - r + 1)
    if cols_idx and cols_idx[-1] == last and tgt_rank:
        j = len(cols_idx) - 1
        dr = _mul(p, s, DC.d_h(*last).entries, K.entries[coff[j]:coff[j + 1]])
    else:
        dr = ZModMatrix.zeros(p, s, tgt_rank, K.cols)
    return lead, dr


def _br_span(DC: DoubleComplex, pp: int, qq: int, r: int) -> ZModMatrix:
    """Column-p components of d(y) for y ∈ F_{p-r+1} with dy ∈ F_p."""
    p, s = DC.p, DC.s
    tgt = DC.rank(pp, qq)
    cols_idx = [(pp - t, qq + t - 1) for t in range(r - 1, -1, -1)
                if pp - t >= 0 and qq + t - 1 >= 0
                and DC.rank(pp - t, qq + t - 1)]
    if not cols_idx:
        return ZModMatrix.zeros(p, s, tgt, 0)
    rows_idx = [(pp - t, qq + t) for t in range(r - 1, 0, -1)
                if DC.rank(pp - t, qq + t)]
    K, coff = _window_kernel(DC, cols_idx, rows_idx)
    acc = ZModMatrix.zeros(p, s, tgt, K.cols)
    for j, (cp, cq) in enumerate(cols_idx):
        blk = K.entries[coff[j]:coff[j + 1]]
        if (cp + 1, cq) == (pp, qq):
            acc = acc + _mul(p, s, DC.d_h(cp, cq).entries, blk)
        if (cp, cq + 1) == (pp, qq):
            acc = acc + _mul(p, s, DC.d_v(cp, cq).entries, blk)
    return acc


def spectral_E_pages(DC: DoubleComplex, r_max: int | None = None):
    """Pages E_1 .. E_{r_max} of the column filtration plus the abutment
    comparison against the total complex.

    Passage from page to page is certified by exact length bookkeeping:
    the length of E_{r+1}^{p,q} must equal the length of ker d_r / im d_r
    on page r, else InvariantError.  Returns (pages, abutment) where the
    abutment dict pairs each E_∞ diagonal sum with the total cohomology
    length in that degree.
    """
    W, H = DC.extent()
    if r_max is None:
        r_max = max(W + H, 2)
    spots = sorted(DC.ranks)
    pages = []
    prev = None
    for r in range(1, r_max + 1):
        profiles, lengths, d_lengths = {}, {}, {}
        for pp, qq in spots:
            Z, dr = _zr_span(DC, pp, qq, r)
            Bsp = _br_span(DC, pp, qq, r)
            mod = subquotient_presentation(Z, Bsp)
            profiles[(pp, qq)] = module_profile(mod)
            lengths[(pp, qq)] = mod.length()
            if dr.rows and dr.cols:
                Bt = _br_span(DC, pp + r, qq - r + 1, r)
                d_lengths[(pp, qq)] = _induced_image_length(dr, Bt)
            else:
                d_lengths[(pp, qq)] = 0
        page = SpectralPage(r, profiles, lengths, d_lengths)
        if prev is not None:
            for pp, qq in spots:
                leave = prev.d_lengths.get((pp, qq), 0)
                back = r - 1
                arrive = prev.d_lengths.get((pp - back, qq + back - 1), 0)
                want = prev.length(pp, qq) - leave - arrive
                if want != page.length(pp, qq):
                    raise InvariantError(
                        f"page passage failed at {(pp, qq)} from page "
                        f"{r - 1}: expected length {want}, got "
                        f"{page.length(pp, qq)}")
        pages.append(page)
        prev = page
    tot = total_complex(DC)
    last = pages[-1]
    abutment = {"equal": True, "degrees": {}}
    for n in range(max(W + H - 1, 1)):
        diag = sum(last.length(pp, n - pp) for pp in range(0, n + 1))
        tlen = tot.cohomology_length(n)
        abutment["degrees"][n] = (diag, tlen)
        if diag != tlen:
            abutment["equal"] = False
    return pages, abutment


# -- towers ------------------------------------------------------------------


@dataclass
class Tower:
    """Finitely stored inverse system N_0 ← N_1 ← ... with a declared
    tail convention ("constant": repeat the last module and transition
    forever; "zero": the system vanishes beyond the stored range)."""

    p: int
    s: int
    ranks: list
    maps: list  # maps[n]: N_{n+1} -> N_n
    tail: str = "constant"

    def __post_init__(self):
        if self.tail not in ("constant", "zero"):
            raise InvariantError("tail convention must be constant or zero")
        self.ranks = [int(r) for r in self.ranks]
        self.maps = [m if isinstance(m, ZModMatrix)
                     else ZModMatrix(self.p, self.s, m) for m in self.maps]
        if len(self.maps) != max(len(self.ranks) - 1, 0):
            raise InvariantError("need exactly one map per adjacent pair")
        for n, m in enumerate(self.maps):
            if m.cols != self.ranks[n + 1] or m.rows != self.ranks[n]:
                raise InvariantError(f"transition {n} is misshaped")
        if self.tail == "constant" and len(self.ranks) >= 2 and \
                self.ranks[-1] != self.ranks[-2]:
            raise InvariantError(
                "constant tail needs matching final ranks to repeat the "
                "last transition")

    def tail_map(self) -> ZModMatrix:
        if self.maps:
            return self.maps[-1]
        return ZModMatrix.identity(self.p, self.s, self.ranks[-1])

    def to_json(self) -> str:
        return json.dumps({
            "format": "tower",
            "p": self.p, "s": self.s,
            "ranks": list(self.ranks),
            "maps": [m.entries.tolist() for m in self.maps],
            "tail": self.tail,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Tower":
        doc = json.loads(text)
        if doc.get("format") != "tower":
            raise ValueError("not a tower document")
        return cls(doc["p"], doc["s"], doc["ranks"], doc["maps"],
                   doc["tail"])


def tower_lim_lim1(T: Tower):
    """(lim, lim^1) of the tower as presented modules.

    lim: with a zero tail every thread eventually vanishes and pulls back
    to zero, so lim = 0.  With a constant tail the repeated transition
    acts bijectively on its eventual image, so lim is that image (the
    iteration count s·rank + 1 guarantees stabilization).
    lim^1 is the cokernel of (x_n) ↦ (x_n − d_n x_{n+1}) on the product
    truncated per the tail convention; towers of finite modules are
    Mittag-Leffler and the cokernel computation certifies lim^1 = 0.
    """
    p, s = T.p, T.s
    if T.tail == "zero" or not T.ranks:
        lim = PresentedModule.free(p, s, 0)
    else:
        d_tail = T.tail_map()
        ev = ZModMatrix.identity(p, s, T.ranks[-1])
        for _ in range(s * T.ranks[-1] + 1):
            ev = d_tail @ ev
        lim = subquotient_presentation(
            ev, ZModMatrix.zeros(p, s, ev.rows, 0))
    if not T.ranks:
        return lim, PresentedModule.free(p, s, 0)
    extra = (s * T.ranks[-1] + 1) if T.tail == "constant" else 0
    ranks = list(T.ranks) + [T.ranks[-1]] * extra
    maps = list(T.maps) + [T.tail_map()] * extra
    # zero tail: the shift map is square (entries beyond the range are
    # zero); constant tail: the last output row belongs to the infinite
    # tail and is dropped from the truncation
    n_rows = len(ranks) if T.tail == "zero" else len(ranks) - 1
    dom = sum(ranks)
    cod = sum(ranks[:n_rows])
    M = np.zeros((cod, dom), dtype=np.int64)
    roff = np.cumsum([0] + ranks[:n_rows])
    coff = np.cumsum([0] + ranks)
    q = p ** s
    for n in range(n_rows):
        M[roff[n]:roff[n] + ranks[n], coff[n]:coff[n] + ranks[n]] = \
            np.eye(ranks[n], dtype=np.int64)
        if n + 1 < len(ranks):
            M[roff[n]:roff[n] + ranks[n],
              coff[n + 1]:coff[n + 1] + ranks[n + 1]] = \
                (-maps[n].entries) % q
    _, coker = kernel_cokernel(ZModMatrix(p, s, M))
    return lim, coker
