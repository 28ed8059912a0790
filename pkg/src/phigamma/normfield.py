"""Truncated Laurent-series model of the characteristic-p norm field.

Elements are finite F_p-linear combinations of powers of a uniformizer
``pi`` with exponents on the grid (1/p^m)Z ("perfection level" m), together
with a precision bound: an element is known exactly below its precision
exponent and unknown above it.  The valuation v_E reads off the least
exponent carrying a nonzero coefficient.

The two semilinear actions are the Frobenius (the p-power map, which scales
exponents and precision by p) and the Gamma-action a |-> substitution
pi |-> (1+pi)^a - 1, which preserves valuations.  At level m the action is
applied to the level-m generator t = pi^(1/p^m) as t |-> (1+t)^a - 1; the
uniqueness of p-th roots in characteristic p makes this consistent across
levels.

Relative elements adjoin a second variable x (with its own fractional
exponent grid); the geometric generator acts by x |-> (1+pi)x and the
arithmetic generator fixes x.

Artin-Schreier extension layers theta^p - theta = u (with v_E(u) < 0) are
modeled by coordinate vectors of length p over the layer below.
"""

from __future__ import annotations

from fractions import Fraction
import math
import re

from .errors import DepthExceededError, PrecisionError

__all__ = [
    "NormFieldElement",
    "RelativeNormElement",
    "ASExtension",
    "ASExtensionElement",
    "frobenius_e",
    "gamma_e",
    "v_e",
    "flat_normalization",
    "raise_perfection",
    "adjoin_as_root",
    "parse_element",
    "format_element",
    "binomial_mod_p",
]

INFINITY = Fraction(10**12)  # sentinel ordering value for the zero element

D_MAX_DEFAULT = 2


def binomial_mod_p(a: int, k: int, p: int, mod_power: int) -> int:
    """C(a, k) mod p via Lucas, for a given as a residue mod p^mod_power.

    Valid only when k < p^mod_power: higher k would see digits of a that the
    residue does not determine.
    """
    if k < 0:
        return 0
    if k >= p**mod_power:
        raise PrecisionError(
            f"binomial C(a, {k}) needs the exponent mod p^{mod_power} and more"
        )
    a %= p**mod_power
    result = 1
    while k:
        ad, kd = a % p, k % p
        if kd > ad:
            return 0
        result = (result * math.comb(ad, kd)) % p
        a //= p
        k //= p
    return result


class NormFieldElement:
    """Truncated Laurent series over F_p on the exponent grid (1/p^m)Z.

    Internally exponents are integer numerators over p^m; ``prec_num`` is the
    exclusive upper bound of the certified window on the same grid.
    """

    __slots__ = ("p", "m", "prec_num", "coeffs")

    def __init__(self, p: int, m: int, coeffs: dict[int, int], prec_num: int):
        self.p = p
        self.m = m
        self.prec_num = prec_num
        self.coeffs = {n: c % p for n, c in coeffs.items()
                       if c % p and n < prec_num}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, p: int, prec: Fraction | int, m: int = 0) -> "NormFieldElement":
        return cls(p, m, {}, _to_grid(prec, p, m))

    @classmethod
    def one(cls, p: int, prec: Fraction | int, m: int = 0) -> "NormFieldElement":
        return cls(p, m, {0: 1}, _to_grid(prec, p, m))

    @classmethod
    def constant(cls, p: int, c: int, prec: Fraction | int, m: int = 0) -> "NormFieldElement":
        return cls(p, m, {0: c}, _to_grid(prec, p, m))

    @classmethod
    def pi_power(cls, p: int, exponent: Fraction | int, prec: Fraction | int,
                 coeff: int = 1) -> "NormFieldElement":
        e = Fraction(exponent)
        m = 0
        while (e * p**m).denominator != 1:
            m += 1
        return cls(p, m, {int(e * p**m): coeff}, _to_grid(prec, p, m))

    @classmethod
    def from_terms(cls, p: int, terms: dict[Fraction, int],
                   prec: Fraction | int) -> "NormFieldElement":
        m = 0
        for e in terms:
            while (Fraction(e) * p**m).denominator != 1:
                m += 1
        return cls(p, m, {int(Fraction(e) * p**m): c for e, c in terms.items()},
                   _to_grid(prec, p, m))

    # -- structure ----------------------------------------------------------

    @property
    def prec(self) -> Fraction:
        return Fraction(self.prec_num, self.p**self.m)

    def is_zero(self) -> bool:
        return not self.coeffs

    def terms(self) -> dict[Fraction, int]:
        q = self.p**self.m
        return {Fraction(n, q): c for n, c in sorted(self.coeffs.items())}

    def valuation(self) -> Fraction | None:
        """Least exponent with nonzero coefficient; None for the zero element."""
        if not self.coeffs:
            return None
        return Fraction(min(self.coeffs), self.p**self.m)

    def at_level(self, m2: int) -> "NormFieldElement":
        """Value-preserving re-indexing onto the finer grid of level m2 >= m."""
        if m2 < self.m:
            raise ValueError("cannot coarsen the exponent grid")
        f = self.p ** (m2 - self.m)
        return NormFieldElement(self.p, m2, {n * f: c for n, c in self.coeffs.items()},
                                self.prec_num * f)

    def try_lower_level(self) -> "NormFieldElement":
        """Drop to the coarsest grid that still carries every exponent."""
        x = self
        while x.m > 0 and all(n % x.p == 0 for n in x.coeffs) and x.prec_num % x.p == 0:
            x = NormFieldElement(x.p, x.m - 1,
                                 {n // x.p: c for n, c in x.coeffs.items()},
                                 x.prec_num // x.p)
        return x

    def truncate(self, prec: Fraction | int) -> "NormFieldElement":
        n = _to_grid(prec, self.p, self.m)
        if n > self.prec_num:
            raise PrecisionError("cannot extend a certified window")
        return NormFieldElement(self.p, self.m, self.coeffs, n)

    # -- ring operations ----------------------------------------------------

    def _unify(self, other: "NormFieldElement"):
        if self.p != other.p:
            raise ValueError("mixed characteristics")
        m = max(self.m, other.m)
        return self.at_level(m), other.at_level(m)

    def __add__(self, other: "NormFieldElement") -> "NormFieldElement":
        a, b = self._unify(other)
        coeffs = dict(a.coeffs)
        for n, c in b.coeffs.items():
            coeffs[n] = (coeffs.get(n, 0) + c) % a.p
        return NormFieldElement(a.p, a.m, coeffs, min(a.prec_num, b.prec_num))

    def __sub__(self, other: "NormFieldElement") -> "NormFieldElement":
        return self + (-other)

    def __neg__(self) -> "NormFieldElement":
        return NormFieldElement(self.p, self.m,
                                {n: -c for n, c in self.coeffs.items()},
                                self.prec_num)

    def __mul__(self, other: "NormFieldElement") -> "NormFieldElement":
        a, b = self._unify(other)
        # precision: lo1 + hi2 and lo2 + hi1, with lo = hi for a zero element
        lo_a = min(a.coeffs) if a.coeffs else a.prec_num
        lo_b = min(b.coeffs) if b.coeffs else b.prec_num
        prec = min(lo_a + b.prec_num, lo_b + a.prec_num)
        coeffs: dict[int, int] = {}
        for n1, c1 in a.coeffs.items():
            for n2, c2 in b.coeffs.items():
                n = n1 + n2
                if n < prec:
                    coeffs[n] = (coeffs.get(n, 0) + c1 * c2) % a.p
        return NormFieldElement(a.p, a.m, coeffs, prec)

    def scale(self, c: int) -> "NormFieldElement":
        return NormFieldElement(self.p, self.m,
                                {n: c * v for n, v in self.coeffs.items()},
                                self.prec_num)

    def __pow__(self, k: int) -> "NormFieldElement":
        if k < 0:
            return self.inverse() ** (-k)
        result = NormFieldElement.one(self.p, INFINITY, self.m)
        base = self
        while k:
            if k & 1:
                result = result * base
            base_needed = k > 1
            if base_needed:
                base = base * base
            k >>= 1
        return result

    def inverse(self) -> "NormFieldElement":
        """Multiplicative inverse; requires a nonzero element.

        Writing x = c*t^v*(1 + h) with v(h) > 0, inverts the unit part by
        back-substitution.  Result precision: prec - 2*v relative shift.
        """
        if not self.coeffs:
            raise ZeroDivisionError("inverting the zero element")
        v = min(self.coeffs)
        c = self.coeffs[v]
        width = self.prec_num - v  # number of certified grid steps in the unit
        # unit part u_k = coeff at v + k, normalized so u_0 = 1
        cinv = pow(c, -1, self.p)
        u = {n - v: cc * cinv % self.p for n, cc in self.coeffs.items()}
        inv = {0: 1}
        for k in range(1, width):
            acc = 0
            for j, cj in inv.items():
                ujk = u.get(k - j, 0)
                if ujk:
                    acc += cj * ujk
            if acc % self.p:
                inv[k] = (-acc) % self.p
        coeffs = {k - v: cc * cinv % self.p for k, cc in inv.items()}
        return NormFieldElement(self.p, self.m, coeffs, width - v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NormFieldElement):
            return NotImplemented
        if self.p != other.p:
            return False
        a, b = self._unify(other)
        return a.coeffs == b.coeffs and a.prec_num == b.prec_num

    def __hash__(self):
        a = self.try_lower_level()
        return hash((a.p, a.m, tuple(sorted(a.coeffs.items())), a.prec_num))

    def agrees_with(self, other: "NormFieldElement") -> bool:
        """Equality on the overlap of the two certified windows."""
        a, b = self._unify(other)
        cut = min(a.prec_num, b.prec_num)
        return ({n: c for n, c in a.coeffs.items() if n < cut}
                == {n: c for n, c in b.coeffs.items() if n < cut})

    # -- semilinear actions -------------------------------------------------

    def frobenius(self) -> "NormFieldElement":
        """x |-> x^p: exponents and precision scale by p."""
        return NormFieldElement(self.p, self.m,
                                {n * self.p: c for n, c in self.coeffs.items()},
                                self.prec_num * self.p)

    def p_th_root(self) -> "NormFieldElement":
        """Unique p-th root, formed on the refined grid of level m+1."""
        return NormFieldElement(self.p, self.m + 1, dict(self.coeffs),
                                self.prec_num)

    def gamma(self, a: int, mod_power: int) -> "NormFieldElement":
        """Substitution t |-> (1+t)^a - 1 on the level-m generator t.

        ``a`` is a unit residue mod p^mod_power; a PrecisionError is raised
        when the window demands binomial coefficients beyond that residue.
        """
        if a % self.p == 0:
            raise ValueError("gamma exponent must be a p-adic unit")
        if not self.coeffs:
            return self
        # inverting the unit part of G and raising it to the deepest negative
        # exponent costs certified terms; widen the working window to cover it
        width = self.prec_num - 2 * min(min(self.coeffs), 0) + 2
        G = _one_plus_t_pow_minus_one(self.p, self.m, a, mod_power, width)
        return self.substitute_generator(G)

    def substitute_generator(self, G: "NormFieldElement") -> "NormFieldElement":
        """Evaluate at t |-> G for a G with v(G) = one grid step.

        Valuation-preserving, so the output window equals the input window.
        """
        if G.m != self.m or G.p != self.p:
            raise ValueError("substitution series must live on the same grid")
        if not self.coeffs:
            return self
        prec = self.prec_num
        p = self.p
        result = NormFieldElement(p, self.m, {}, prec)
        # group by exponent, using iterated powers of G (and of its inverse)
        exps = sorted(self.coeffs)
        pos = [n for n in exps if n >= 0]
        neg = [n for n in exps if n < 0]
        if pos:
            power = _pow_window(G, pos[0], prec)
            last = pos[0]
            for n in pos:
                if n != last:
                    power = _mul_window(power, _pow_window(G, n - last, prec), prec)
                    last = n
                result = result + power.scale(self.coeffs[n]).truncate_to_num(prec)
        if neg:
            # negative powers shift information downward; carry window slack
            work = prec - 2 * neg[0] + 2
            Ginv = G.inverse()
            power = _pow_window(Ginv, -neg[-1], work)
            last = neg[-1]
            for n in reversed(neg):
                if n != last:
                    power = _mul_window(power, _pow_window(Ginv, last - n, work), work)
                    last = n
                result = result + power.scale(self.coeffs[n]).truncate_to_num(prec)
        return NormFieldElement(p, self.m, result.coeffs, prec)

    def truncate_to_num(self, prec_num: int) -> "NormFieldElement":
        n = min(prec_num, self.prec_num)
        return NormFieldElement(self.p, self.m, self.coeffs, n)

    def __repr__(self):
        return f"<{format_element(self)} + O(pi^{self.prec})>"


def _to_grid(prec: Fraction | int, p: int, m: int) -> int:
    f = Fraction(prec) * p**m
    if f.denominator != 1:
        raise ValueError(f"precision {prec} not on the level-{m} grid")
    return int(f)


def _mul_window(a: NormFieldElement, b: NormFieldElement, prec_num: int) -> NormFieldElement:
    """Product truncated to a caller-managed window (coefficients exact there)."""
    p = a.p
    coeffs: dict[int, int] = {}
    for n1, c1 in a.coeffs.items():
        for n2, c2 in b.coeffs.items():
            n = n1 + n2
            if n < prec_num:
                coeffs[n] = (coeffs.get(n, 0) + c1 * c2) % p
    return NormFieldElement(p, a.m, coeffs, max(prec_num, 0) or prec_num)


def _pow_window(x: NormFieldElement, k: int, prec_num: int) -> NormFieldElement:
    if k < 0:
        raise ValueError("negative power in window helper")
    result = NormFieldElement(x.p, x.m, {0: 1}, prec_num)
    base = x
    while k:
        if k & 1:
            result = _mul_window(result, base, prec_num)
        k >>= 1
        if k:
            base = _mul_window(base, base, prec_num)
    return result


def _one_plus_t_pow_minus_one(p: int, m: int, a: int, mod_power: int,
                              width: int) -> NormFieldElement:
    """(1+t)^a - 1 truncated to t^width on the level-m grid."""
    coeffs = {}
    for k in range(1, max(width, 2)):
        c = binomial_mod_p(a, k, p, mod_power)
        if c:
            coeffs[k] = c
    return NormFieldElement(p, m, coeffs, max(width, 2))


# -- module-level operation names ------------------------------------------


def frobenius_e(x: NormFieldElement) -> NormFieldElement:
    return x.frobenius()


def gamma_e(x: NormFieldElement, a: int, mod_power: int = 12) -> NormFieldElement:
    return x.gamma(a, mod_power)


def v_e(x: NormFieldElement) -> tuple[Fraction | None, bool]:
    """(valuation, precision_limited): None means 'infinite within the window'."""
    v = x.valuation()
    return v, v is None


def flat_normalization(v: Fraction, p: int) -> Fraction:
    """Rescale a pi-normalized valuation to the p-normalized scale."""
    return Fraction(v) * Fraction(p, p - 1)


def raise_perfection(x: NormFieldElement) -> NormFieldElement:
    """Pass one level up the inverse system: the p-th root on the finer grid.

    Composing with the Frobenius recovers the value-preserving re-grid of x.
    """
    return x.p_th_root()


# -- Artin-Schreier layers --------------------------------------------------


class ASExtension:
    """Extension layer theta^p - theta = u over a base (field or lower layer)."""

    __slots__ = ("p", "u", "base", "depth")

    def __init__(self, u: NormFieldElement, base: "ASExtension | None" = None,
                 d_max: int = D_MAX_DEFAULT):
        v = u.valuation()
        if v is None or v > 0:
            raise ValueError("defining element must have valuation <= 0")
        self.p = u.p
        self.u = u
        self.base = base
        self.depth = 1 + (base.depth if base else 0)
        if self.depth > d_max:
            raise DepthExceededError(
                f"tower depth {self.depth} exceeds budget {d_max}")

    def theta_valuation(self) -> Fraction:
        v = self.u.valuation()
        return v / self.p

    def zero_coords(self, prec: Fraction) -> list:
        if self.base is None:
            return [NormFieldElement.zero(self.p, prec, self.u.m)
                    for _ in range(self.p)]
        return [ASExtensionElement(self.base, self.base.zero_coords(prec))
                for _ in range(self.p)]

    def embed(self, x) -> "ASExtensionElement":
        """Constant-in-theta embedding of a lower-layer element."""
        coords = self.zero_coords(x.prec if isinstance(x, NormFieldElement)
                                  else x.prec)
        coords[0] = x
        return ASExtensionElement(self, coords)

    def theta(self, prec: Fraction) -> "ASExtensionElement":
        coords = self.zero_coords(prec)
        coords[1] = _lift_to(self.base, NormFieldElement.one(self.p, prec, self.u.m))
        return ASExtensionElement(self, coords)


def _lift_to(ext: ASExtension | None, x: NormFieldElement):
    if ext is None:
        return x
    return ext.embed(_lift_to(ext.base, x))


class ASExtensionElement:
    """Element sum(c_j * theta^j) of an Artin-Schreier layer."""

    __slots__ = ("ext", "coords")

    def __init__(self, ext: ASExtension, coords: list):
        if len(coords) != ext.p:
            raise ValueError("coordinate vector must have length p")
        self.ext = ext
        self.coords = list(coords)

    @property
    def p(self) -> int:
        return self.ext.p

    @property
    def prec(self):
        return self.coords[0].prec

    def __add__(self, other: "ASExtensionElement") -> "ASExtensionElement":
        if other.ext is not self.ext:
            raise ValueError("elements of different extension layers")
        return ASExtensionElement(self.ext,
                                  [a + b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "ASExtensionElement":
        return ASExtensionElement(self.ext, [-a for a in self.coords])

    def __sub__(self, other: "ASExtensionElement") -> "ASExtensionElement":
        return self + (-other)

    def __mul__(self, other: "ASExtensionElement") -> "ASExtensionElement":
        if other.ext is not self.ext:
            raise ValueError("elements of different extension layers")
        p = self.p
        ext = self.ext
        u_low = _as_layer_element(ext.base, ext.u)
        # raw product has theta-degree up to 2p-2; fold with theta^p = theta + u
        raw = [None] * (2 * p - 1)
        for i, a in enumerate(self.coords):
            for j, b in enumerate(other.coords):
                t = a * b
                raw[i + j] = t if raw[i + j] is None else raw[i + j] + t
        zero = self.ext.zero_coords(self.coords[0].prec)[0]
        raw = [zero if r is None else r for r in raw]
        for k in range(2 * p - 2, p - 1, -1):
            c = raw[k]
            raw[k - p + 1] = raw[k - p + 1] + c
            raw[k - p] = raw[k - p] + c * u_low
            raw[k] = None
        return ASExtensionElement(ext, raw[:p])

    def frobenius(self) -> "ASExtensionElement":
        """theta^p = theta + u turns Frobenius into a coordinate shuffle.

        (sum c_j theta^j)^p = sum c_j^p (theta+u)^j, expanded and refolded.
        """
        ext = self.ext
        frob_coords = [_layer_frobenius(c) for c in self.coords]
        u_low = _as_layer_element(ext.base, ext.u)
        theta_plus_u = ext.theta(self.prec)  # theta
        theta_plus_u = ASExtensionElement(
            ext,
            [theta_plus_u.coords[0] + u_low] + theta_plus_u.coords[1:])
        result = ext.embed(frob_coords[0])
        power = None
        for j in range(1, ext.p):
            power = theta_plus_u if power is None else power * theta_plus_u
            result = result + power * ext.embed(frob_coords[j])
        return result

    def valuation(self) -> Fraction | None:
        vt = self.ext.theta_valuation()
        best = None
        for j, c in enumerate(self.coords):
            v = c.valuation()
            if v is not None:
                cand = v + j * vt
                if best is None or cand < best:
                    best = cand
        return best

    def is_zero(self) -> bool:
        return all(_layer_is_zero(c) for c in self.coords)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ASExtensionElement)
                and self.ext is other.ext
                and all(a == b for a, b in zip(self.coords, other.coords)))

    def __repr__(self):
        return f"ASExtensionElement(depth={self.ext.depth}, {self.coords!r})"


def _as_layer_element(base: ASExtension | None, x: NormFieldElement):
    return x if base is None else _lift_to(base, x)


def _layer_frobenius(c):
    return c.frobenius()


def _layer_is_zero(c) -> bool:
    return c.is_zero()


def adjoin_as_root(u: NormFieldElement, base: ASExtension | None = None,
                   d_max: int = D_MAX_DEFAULT) -> ASExtension:
    """Extension context with theta^p - theta = u; rejects v_E(u) > 0.

    Positive valuation never needs a layer (Hensel solves in place), so it is
    refused; valuation zero is allowed because a constant obstruction has no
    root over F_p.
    """
    v = u.valuation()
    if v is None or v > 0:
        raise ValueError("no extension needed: defining element must have "
                         "valuation <= 0")
    return ASExtension(u, base, d_max)


# -- relative elements ------------------------------------------------------


class RelativeNormElement:
    """Finite sum of x-monomials with norm-field coefficients.

    The x-exponents live on their own (1/p^mx)Z grid; all coefficients share
    the characteristic-p coefficient model above.  The geometric generator
    acts by x^j |-> (1+pi)^j x^j and the arithmetic generator acts on
    coefficients only.
    """

    __slots__ = ("p", "mx", "parts")

    def __init__(self, p: int, mx: int, parts: dict[int, NormFieldElement]):
        self.p = p
        self.mx = mx
        self.parts = {j: c for j, c in parts.items() if not c.is_zero()}

    @classmethod
    def from_terms(cls, p: int, terms: dict[Fraction, NormFieldElement]) -> "RelativeNormElement":
        mx = 0
        for e in terms:
            while (Fraction(e) * p**mx).denominator != 1:
                mx += 1
        return cls(p, mx, {int(Fraction(e) * p**mx): c for e, c in terms.items()})

    def x_terms(self) -> dict[Fraction, NormFieldElement]:
        q = self.p**self.mx
        return {Fraction(j, q): c for j, c in sorted(self.parts.items())}

    def at_x_level(self, mx2: int) -> "RelativeNormElement":
        if mx2 < self.mx:
            raise ValueError("cannot coarsen the x-grid")
        f = self.p ** (mx2 - self.mx)
        return RelativeNormElement(self.p, mx2,
                                   {j * f: c for j, c in self.parts.items()})

    def _unify(self, other: "RelativeNormElement"):
        mx = max(self.mx, other.mx)
        return self.at_x_level(mx), other.at_x_level(mx)

    def __add__(self, other: "RelativeNormElement") -> "RelativeNormElement":
        a, b = self._unify(other)
        parts = dict(a.parts)
        for j, c in b.parts.items():
            parts[j] = parts[j] + c if j in parts else c
        return RelativeNormElement(a.p, a.mx, parts)

    def __neg__(self) -> "RelativeNormElement":
        return RelativeNormElement(self.p, self.mx,
                                   {j: -c for j, c in self.parts.items()})

    def __sub__(self, other: "RelativeNormElement") -> "RelativeNormElement":
        return self + (-other)

    def __mul__(self, other: "RelativeNormElement") -> "RelativeNormElement":
        a, b = self._unify(other)
        parts: dict[int, NormFieldElement] = {}
        for j1, c1 in a.parts.items():
            for j2, c2 in b.parts.items():
                j = j1 + j2
                t = c1 * c2
                parts[j] = parts[j] + t if j in parts else t
        return RelativeNormElement(a.p, a.mx, parts)

    def gamma_tilde(self, power: int = 1) -> "RelativeNormElement":
        """Geometric action: x^j |-> (1+pi)^(k*j) x^j for gamma-tilde^k."""
        parts = {}
        for j, c in self.parts.items():
            e = power * j  # exponent of (1+pi^(1/p^mx))
            mult = _one_plus_gen_power(self.p, self.mx, e, c)
            parts[j] = mult
        return RelativeNormElement(self.p, self.mx, parts)

    def gamma(self, a: int, mod_power: int = 12) -> "RelativeNormElement":
        """Arithmetic action: coefficientwise gamma; x is fixed."""
        return RelativeNormElement(self.p, self.mx,
                                   {j: c.gamma(a, mod_power)
                                    for j, c in self.parts.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, RelativeNormElement):
            return NotImplemented
        a, b = self._unify(other)
        return a.parts.keys() == b.parts.keys() and all(
            a.parts[j] == b.parts[j] for j in a.parts)

    def __repr__(self):
        return f"RelativeNormElement({self.x_terms()!r})"


def _one_plus_gen_power(p: int, mx: int, e: int, c: NormFieldElement) -> NormFieldElement:
    """c * (1 + pi^(1/p^mx))^e, the epsilon-multiplier of the geometric action."""
    level = max(c.m, mx)
    cc = c.at_level(level)
    width = cc.prec_num - (min(min(cc.coeffs), 0) if cc.coeffs else 0)
    gen_step = p ** (level - mx)  # one x-grid step on the pi-grid of `level`
    factor_coeffs = {}
    k = 0
    # (1+t)^e with t = pi^(1/p^mx); e may be negative (expand via inverse)
    if e >= 0:
        for k in range(0, width // gen_step + 2):
            b = math.comb(e, k) % p if e >= 0 else 0
            if b:
                factor_coeffs[k * gen_step] = b
    else:
        # (1+t)^e = ((1+t)^-1)^(-e); use binomial with negative exponent:
        # C(e, k) = (-1)^k C(k - e - 1, k)
        for k in range(0, width // gen_step + 2):
            b = (pow(-1, k, p) * math.comb(k - e - 1, k)) % p
            if b:
                factor_coeffs[k * gen_step] = b
    factor = NormFieldElement(p, level, factor_coeffs,
                              max(cc.prec_num, (width // gen_step + 2) * gen_step))
    return cc * factor


# -- text syntax ------------------------------------------------------------

_TERM_RE = re.compile(
    r"^\s*(?:(?P<coeff>\d+)\s*\*\s*)?pi\^\(?(?P<num>-?\d+)(?:/(?P<den>\d+))?\)?\s*$"
    r"|^\s*(?P<const>\d+)\s*$"
)


def parse_element(text: str, p: int, prec: Fraction | int) -> NormFieldElement:
    """Parse the element syntax, e.g. ``pi^-2 + 2*pi^(1/3) + pi^4``."""
    text = text.strip()
    if text == "0":
        return NormFieldElement.zero(p, prec)
    terms: dict[Fraction, int] = {}
    for raw in text.split("+"):
        mt = _TERM_RE.match(raw)
        if not mt:
            raise ValueError(f"cannot parse term {raw!r}")
        if mt.group("const") is not None:
            e, c = Fraction(0), int(mt.group("const"))
        else:
            c = int(mt.group("coeff") or 1)
            num = int(mt.group("num"))
            den = int(mt.group("den") or 1)
            e = Fraction(num, den)
        terms[e] = terms.get(e, 0) + c
    return NormFieldElement.from_terms(p, terms, prec)


def format_element(x: NormFieldElement) -> str:
    """Canonical printer; round-trips bit-exactly with parse_element."""
    if x.is_zero():
        return "0"
    pieces = []
    for e, c in x.terms().items():
        if e == 0:
            pieces.append(str(c))
        else:
            head = "" if c == 1 else f"{c}*"
            if e.denominator == 1:
                pieces.append(f"{head}pi^{e.numerator}")
            else:
                pieces.append(f"{head}pi^({e.numerator}/{e.denominator})")
    return " + ".join(pieces)
