"""Two finite models of the mixed-characteristic lift ring modulo p^s.

ArithLiftElement: truncated Laurent series over Z/p^s in a variable pi with
Frobenius pi |-> (1+pi)^p - 1 and Gamma-action pi |-> (1+pi)^a - 1.  This is
the fast model used by the cohomology engine; reducing mod p recovers the
characteristic-p Laurent model.

WittVector: genuine length-s Witt coordinates over norm-field elements.
Sums and products are evaluated exactly by lifting the coordinates to
integer-coefficient truncated Laurent series (a torsion-free ring), passing
to ghost components, operating there, and recovering coordinates by the
successive exact divisions that Witt integrality guarantees.  This sidesteps
the blowup of materializing universal Witt polynomials at larger s while
computing the same values.

Also here: the truncated valuations v_E^{<=N}, the overconvergence gauge
w_r(z) = inf_k (r v_E(z_k) + k), and weak-topology neighborhoods
U_{n,h} = p^n A + pi^h A^+ with a decision procedure through Witt division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PrecisionError
from .normfield import NormFieldElement, flat_normalization

__all__ = [
    "ArithLiftElement",
    "WittVector",
    "ValuationReport",
    "WeakNeighborhood",
    "teichmuller",
    "witt_add",
    "witt_mul",
    "witt_neg",
    "witt_sub",
    "witt_inverse",
    "witt_scalar",
    "ghost_check",
    "phi_A",
    "gamma_A",
    "v_le_n",
    "w_r_valuation",
    "weak_membership",
    "pi_witt",
]


def _legendre_vp_factorial(k: int, p: int) -> int:
    v, q = 0, p
    while q <= k:
        v += k // q
        q *= p
    return v


def binomial_mod_ps(a: int, k: int, p: int, s: int,
                    mod_power: int | None = None) -> int:
    """C(a, k) mod p^s.

    With mod_power=None the exponent a is exact and the binomial is computed
    directly.  Otherwise a is only known mod p^mod_power, and the call fails
    with PrecisionError unless that residue pins down the binomial mod p^s.
    """
    if k < 0:
        return 0
    if mod_power is None:
        return math.comb(a, k) % p**s if a >= 0 else \
            (pow(-1, k, p**s) * math.comb(k - a - 1, k)) % p**s
    if mod_power < s + _legendre_vp_factorial(k, p):
        raise PrecisionError(
            f"need the exponent mod p^{s + _legendre_vp_factorial(k, p)} "
            f"for C(a, {k}) mod p^{s}")
    return math.comb(a % p**mod_power, k) % p**s


# ---------------------------------------------------------------------------
# arithmetic-lift model


class ArithLiftElement:
    """Truncated Laurent series over Z/p^s in pi (integer exponent grid)."""

    __slots__ = ("p", "s", "coeffs", "prec_num")

    def __init__(self, p: int, s: int, coeffs: dict[int, int], prec_num: int):
        self.p = p
        self.s = s
        q = p**s
        self.coeffs = {n: c % q for n, c in coeffs.items()
                       if c % q and n < prec_num}
        self.prec_num = prec_num

    @property
    def modulus(self) -> int:
        return self.p**self.s

    @classmethod
    def zero(cls, p: int, s: int, prec: int) -> "ArithLiftElement":
        return cls(p, s, {}, prec)

    @classmethod
    def one(cls, p: int, s: int, prec: int) -> "ArithLiftElement":
        return cls(p, s, {0: 1}, prec)

    @classmethod
    def constant(cls, p: int, s: int, c: int, prec: int) -> "ArithLiftElement":
        return cls(p, s, {0: c}, prec)

    @classmethod
    def pi_power(cls, p: int, s: int, n: int, prec: int, coeff: int = 1) -> "ArithLiftElement":
        return cls(p, s, {n: coeff}, prec)

    @classmethod
    def lift(cls, x: NormFieldElement, s: int) -> "ArithLiftElement":
        """Coefficientwise canonical lift of a level-0 norm-field element."""
        if x.m != 0:
            raise ValueError("only level-0 elements lift to the pi-model")
        return cls(x.p, s, dict(x.coeffs), x.prec_num)

    def reduce_mod_p(self) -> NormFieldElement:
        return NormFieldElement(self.p, 0,
                                {n: c % self.p for n, c in self.coeffs.items()},
                                self.prec_num)

    def reduce_power(self, s2: int) -> "ArithLiftElement":
        if s2 > self.s:
            raise ValueError("cannot increase the coefficient modulus")
        return ArithLiftElement(self.p, s2, self.coeffs, self.prec_num)

    def is_zero(self) -> bool:
        return not self.coeffs

    def valuation_pi(self) -> int | None:
        """pi-adic valuation of the mod-p reduction (None if it vanishes)."""
        red = [n for n, c in self.coeffs.items() if c % self.p]
        return min(red) if red else None

    def _check(self, other: "ArithLiftElement") -> None:
        if self.p != other.p or self.s != other.s:
            raise ValueError("mixed coefficient rings")

    def __add__(self, other: "ArithLiftElement") -> "ArithLiftElement":
        self._check(other)
        coeffs = dict(self.coeffs)
        for n, c in other.coeffs.items():
            coeffs[n] = coeffs.get(n, 0) + c
        return ArithLiftElement(self.p, self.s, coeffs,
                                min(self.prec_num, other.prec_num))

    def __neg__(self) -> "ArithLiftElement":
        return ArithLiftElement(self.p, self.s,
                                {n: -c for n, c in self.coeffs.items()},
                                self.prec_num)

    def __sub__(self, other: "ArithLiftElement") -> "ArithLiftElement":
        return self + (-other)

    def __mul__(self, other: "ArithLiftElement") -> "ArithLiftElement":
        self._check(other)
        lo_a = min(self.coeffs) if self.coeffs else self.prec_num
        lo_b = min(other.coeffs) if other.coeffs else other.prec_num
        prec = min(lo_a + other.prec_num, lo_b + self.prec_num)
        coeffs: dict[int, int] = {}
        for n1, c1 in self.coeffs.items():
            for n2, c2 in other.coeffs.items():
                n = n1 + n2
                if n < prec:
                    coeffs[n] = coeffs.get(n, 0) + c1 * c2
        return ArithLiftElement(self.p, self.s, coeffs, prec)

    def scale(self, c: int) -> "ArithLiftElement":
        return ArithLiftElement(self.p, self.s,
                                {n: c * v for n, v in self.coeffs.items()},
                                self.prec_num)

    def truncate_to_num(self, prec_num: int) -> "ArithLiftElement":
        return ArithLiftElement(self.p, self.s, self.coeffs,
                                min(prec_num, self.prec_num))

    def __pow__(self, k: int) -> "ArithLiftElement":
        if k < 0:
            return self.inverse() ** (-k)
        result = ArithLiftElement.one(self.p, self.s, self.prec_num + abs(k) + 2)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inverse(self) -> "ArithLiftElement":
        """Newton iteration from the inverse of the mod-p reduction.

        Requires the reduction to be nonzero (then the element is a unit of
        the p-complete Laurent model).
        """
        v = self.valuation_pi()
        if v is None:
            raise ZeroDivisionError("element is divisible by p; not a unit")
        red = self.reduce_mod_p()
        y = ArithLiftElement.lift(red.inverse(), self.s)
        two = ArithLiftElement.constant(self.p, self.s, 2, y.prec_num)
        steps = max(1, math.ceil(math.log2(self.s)) + 1) if self.s > 1 else 0
        for _ in range(steps):
            y = y * (two.truncate_to_num(y.prec_num) - self * y)
        return y

    def substitute(self, G: "ArithLiftElement") -> "ArithLiftElement":
        """Evaluate at pi |-> G for G with unit-times-pi-power leading shape."""
        if not self.coeffs:
            return self
        prec = self.prec_num
        exps = sorted(self.coeffs)
        result = ArithLiftElement(self.p, self.s, {}, prec)
        pos = [n for n in exps if n >= 0]
        neg = [n for n in exps if n < 0]
        if pos:
            power = G ** pos[0]
            last = pos[0]
            for n in pos:
                if n != last:
                    power = power * G ** (n - last)
                    last = n
                result = result + power.scale(self.coeffs[n]).truncate_to_num(prec)
        if neg:
            Ginv = G.inverse()
            power = Ginv ** (-neg[-1])
            last = neg[-1]
            for n in reversed(neg):
                if n != last:
                    power = power * Ginv ** (last - n)
                    last = n
                result = result + power.scale(self.coeffs[n]).truncate_to_num(prec)
        return result.truncate_to_num(prec)

    def one_plus_pi_power(self, a: int, mod_power: int | None,
                          width: int) -> "ArithLiftElement":
        """(1+pi)^a - 1 to pi^width; a exact when mod_power is None."""
        coeffs = {}
        for k in range(1, width):
            c = binomial_mod_ps(a, k, self.p, self.s, mod_power)
            if c:
                coeffs[k] = c
        return ArithLiftElement(self.p, self.s, coeffs, width)

    def frobenius(self) -> "ArithLiftElement":
        """pi |-> (1+pi)^p - 1, the canonical Frobenius lift."""
        width = self._subst_width()
        G = self.one_plus_pi_power(self.p, None, width)
        return self.substitute(G)

    def gamma(self, a: int, mod_power: int | None = None) -> "ArithLiftElement":
        """pi |-> (1+pi)^a - 1 for a unit exponent a (exact, or mod p^mod_power)."""
        if a % self.p == 0:
            raise ValueError("gamma exponent must be a p-adic unit")
        width = self._subst_width()
        G = self.one_plus_pi_power(a, mod_power, width)
        return self.substitute(G)

    def _subst_width(self) -> int:
        lo = min(min(self.coeffs), 0) if self.coeffs else 0
        return self.prec_num - 2 * lo + 2 * self.s + 2

    def __eq__(self, other) -> bool:
        return (isinstance(other, ArithLiftElement)
                and (self.p, self.s) == (other.p, other.s)
                and self.coeffs == other.coeffs
                and self.prec_num == other.prec_num)

    def agrees_with(self, other: "ArithLiftElement") -> bool:
        cut = min(self.prec_num, other.prec_num)
        return ({n: c for n, c in self.coeffs.items() if n < cut}
                == {n: c for n, c in other.coeffs.items() if n < cut})

    def __repr__(self):
        items = " + ".join(f"{c}*pi^{n}" for n, c in sorted(self.coeffs.items()))
        return f"<{items or 0} + O(pi^{self.prec_num}) mod {self.p}^{self.s}>"


# ---------------------------------------------------------------------------
# integer-coefficient series: the torsion-free cover used for ghost arithmetic


class _ZSeries:
    """Truncated Laurent series with integer coefficients on a 1/p^m grid.

    Coefficients are kept reduced modulo a large p-power headroom modulus; all
    retained coefficients are exact there, so the exact divisions of the ghost
    recovery are well-defined.
    """

    __slots__ = ("p", "m", "coeffs", "prec_num", "headroom")

    def __init__(self, p, m, coeffs, prec_num, headroom):
        self.p = p
        self.m = m
        self.headroom = headroom
        q = p**headroom
        self.coeffs = {n: c % q for n, c in coeffs.items()
                       if c % q and n < prec_num}
        self.prec_num = prec_num

    @classmethod
    def lift(cls, x: NormFieldElement, headroom: int) -> "_ZSeries":
        return cls(x.p, x.m, dict(x.coeffs), x.prec_num, headroom)

    def reduce_mod_p(self) -> NormFieldElement:
        return NormFieldElement(self.p, self.m,
                                {n: c % self.p for n, c in self.coeffs.items()},
                                self.prec_num)

    def __add__(self, other):
        coeffs = dict(self.coeffs)
        for n, c in other.coeffs.items():
            coeffs[n] = coeffs.get(n, 0) + c
        return _ZSeries(self.p, self.m, coeffs,
                        min(self.prec_num, other.prec_num), self.headroom)

    def __neg__(self):
        return _ZSeries(self.p, self.m, {n: -c for n, c in self.coeffs.items()},
                        self.prec_num, self.headroom)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        lo_a = min(self.coeffs) if self.coeffs else self.prec_num
        lo_b = min(other.coeffs) if other.coeffs else other.prec_num
        prec = min(lo_a + other.prec_num, lo_b + self.prec_num)
        q = self.p**self.headroom
        coeffs: dict[int, int] = {}
        for n1, c1 in self.coeffs.items():
            for n2, c2 in other.coeffs.items():
                n = n1 + n2
                if n < prec:
                    coeffs[n] = (coeffs.get(n, 0) + c1 * c2) % q
        return _ZSeries(self.p, self.m, coeffs, prec, self.headroom)

    def __pow__(self, k: int):
        result = _ZSeries(self.p, self.m, {0: 1}, self.prec_num * 4 + 8,
                          self.headroom)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c: int):
        return _ZSeries(self.p, self.m, {n: c * v for n, v in self.coeffs.items()},
                        self.prec_num, self.headroom)

    def exact_div_p_power(self, k: int) -> "_ZSeries":
        pk = self.p**k
        coeffs = {}
        for n, c in self.coeffs.items():
            # representatives live mod p^headroom; divisibility is tested there
            if c % pk:
                raise PrecisionError(
                    "ghost recovery hit a non-divisible coefficient; "
                    "increase the window or headroom")
            coeffs[n] = c // pk
        return _ZSeries(self.p, self.m, coeffs, self.prec_num, self.headroom - k)


# ---------------------------------------------------------------------------
# Witt coordinates


class WittVector:
    """Length-s Witt vector with norm-field components (a_0, ..., a_{s-1})."""

    __slots__ = ("p", "s", "components")

    def __init__(self, p: int, s: int, components):
        components = list(components)
        if len(components) != s:
            raise ValueError("component count must equal s")
        self.p = p
        self.s = s
        self.components = components

    @classmethod
    def zero(cls, p: int, s: int, prec: Fraction | int) -> "WittVector":
        return cls(p, s, [NormFieldElement.zero(p, prec) for _ in range(s)])

    @classmethod
    def from_constant(cls, p: int, s: int, c: int, prec: Fraction | int) -> "WittVector":
        """Image of the integer c, i.e. c copies of 1 summed in the Witt ring."""
        result = cls.zero(p, s, prec)
        one = teichmuller(NormFieldElement.one(p, prec), s)
        c %= p**s
        for _ in range(c):
            result = witt_add(result, one)
        return result

    def _check(self, other: "WittVector") -> None:
        if self.p != other.p or self.s != other.s:
            raise ValueError("mixed Witt rings")

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def reduce_mod_p(self) -> NormFieldElement:
        return self.components[0]

    def frobenius(self) -> "WittVector":
        return WittVector(self.p, self.s,
                          [c.frobenius() for c in self.components])

    def gamma(self, a: int, mod_power: int | None = None) -> "WittVector":
        # the char-p components only see the exponent through Lucas digits
        mp = mod_power if mod_power is not None else 12
        return WittVector(self.p, self.s,
                          [c.gamma(a, mp) if not c.is_zero() else c
                           for c in self.components])

    def __eq__(self, other) -> bool:
        return (isinstance(other, WittVector)
                and (self.p, self.s) == (other.p, other.s)
                and all(a == b for a, b in zip(self.components, other.components)))

    def agrees_with(self, other: "WittVector") -> bool:
        return all(a.agrees_with(b)
                   for a, b in zip(self.components, other.components))

    def __repr__(self):
        return f"WittVector({self.components!r})"


def teichmuller(a: NormFieldElement, s: int) -> WittVector:
    comps = [a] + [NormFieldElement.zero(a.p, a.prec, a.m) for _ in range(s - 1)]
    return WittVector(a.p, s, comps)


def _common_level(vectors: list[WittVector]) -> int:
    return max(c.m for v in vectors for c in v.components)


def _ghost(lifts: list[_ZSeries], p: int) -> list[_ZSeries]:
    ghosts = []
    for i in range(len(lifts)):
        acc = None
        for j in range(i + 1):
            term = (lifts[j] ** (p ** (i - j))).scale(p**j)
            acc = term if acc is None else acc + term
        ghosts.append(acc)
    return ghosts


def _unghost(ghosts: list[_ZSeries], p: int) -> list[_ZSeries]:
    comps: list[_ZSeries] = []
    for i, w in enumerate(ghosts):
        t = w
        for j, z in enumerate(comps):
            t = t - (z ** (p ** (i - j))).scale(p**j)
        comps.append(t.exact_div_p_power(i))
    return comps


def _witt_ghost_op(x: WittVector, y: WittVector, op: str) -> WittVector:
    x._check(y)
    p, s = x.p, x.s
    m = _common_level([x, y])
    headroom = 2 * s + 2
    lx = [_ZSeries.lift(c.at_level(m), headroom) for c in x.components]
    ly = [_ZSeries.lift(c.at_level(m), headroom) for c in y.components]
    gx, gy = _ghost(lx, p), _ghost(ly, p)
    if op == "add":
        gz = [a + b for a, b in zip(gx, gy)]
    elif op == "mul":
        gz = [a * b for a, b in zip(gx, gy)]
    else:
        raise ValueError(op)
    comps = _unghost(gz, p)
    return WittVector(p, s, [c.reduce_mod_p() for c in comps])


def witt_add(x: WittVector, y: WittVector) -> WittVector:
    return _witt_ghost_op(x, y, "add")


def witt_mul(x: WittVector, y: WittVector) -> WittVector:
    return _witt_ghost_op(x, y, "mul")


def witt_neg(x: WittVector) -> WittVector:
    p, s = x.p, x.s
    m = _common_level([x])
    headroom = 2 * s + 2
    lx = [_ZSeries.lift(c.at_level(m), headroom) for c in x.components]
    gz = [-g for g in _ghost(lx, p)]
    comps = _unghost(gz, p)
    return WittVector(p, s, [c.reduce_mod_p() for c in comps])


def witt_sub(x: WittVector, y: WittVector) -> WittVector:
    return witt_add(x, witt_neg(y))


def witt_scalar(c: int, x: WittVector) -> WittVector:
    """Multiplication by the integer constant c (image of c in W_s)."""
    prec = min(comp.prec for comp in x.components)
    return witt_mul(WittVector.from_constant(x.p, x.s, c, prec), x)


def witt_inverse(x: WittVector) -> WittVector:
    """Newton inversion; needs an invertible (nonzero) leading component."""
    a0 = x.components[0]
    if a0.is_zero():
        raise ZeroDivisionError("leading Witt component vanishes on the window")
    y = teichmuller(a0.inverse(), x.s)
    steps = max(1, math.ceil(math.log2(max(x.s, 2))) + 1)
    prec = min(comp.prec for comp in y.components)
    two = WittVector.from_constant(x.p, x.s, 2, prec)
    for _ in range(steps):
        y = witt_mul(y, witt_sub(two, witt_mul(x, y)))
    return y


def ghost_check(x: WittVector, y: WittVector, t: int = 2) -> dict:
    """Verify the ghost-component homomorphism law through integral lifts.

    Components are lifted to integer series with headroom p^(s+t); the law
    for the i-th ghost holds mod p^(i+1) regardless of lift choices, and that
    is the precision certified per index.
    """
    p, s = x.p, x.s
    m = _common_level([x, y])
    headroom = s + t
    lx = [_ZSeries.lift(c.at_level(m), headroom) for c in x.components]
    ly = [_ZSeries.lift(c.at_level(m), headroom) for c in y.components]
    xs = witt_add(x, y)
    xm = witt_mul(x, y)
    ls = [_ZSeries.lift(c.at_level(m), headroom) for c in xs.components]
    lm = [_ZSeries.lift(c.at_level(m), headroom) for c in xm.components]
    gx, gy = _ghost(lx, p), _ghost(ly, p)
    gs, gm = _ghost(ls, p), _ghost(lm, p)
    verified = []
    ok = True
    for i in range(s):
        mod = p ** min(i + 1, headroom)
        add_diff = gs[i] - (gx[i] + gy[i])
        mul_diff = gm[i] - (gx[i] * gy[i])
        cut = min(add_diff.prec_num, mul_diff.prec_num)
        good = all(c % mod == 0 for n, c in add_diff.coeffs.items() if n < cut) \
            and all(c % mod == 0 for n, c in mul_diff.coeffs.items() if n < cut)
        ok = ok and good
        verified.append(min(i + 1, headroom))
    return {"passed": ok, "verified_p_powers": verified}


def phi_A(z):
    """Frobenius on either model."""
    return z.frobenius()


def gamma_A(z, a: int, mod_power: int | None = None):
    """Gamma-action on either model."""
    return z.gamma(a, mod_power)


def v_le_n(z: WittVector, N: int) -> tuple[Fraction | None, bool]:
    """v_E^{<=N}: infimum of component valuations up to index N."""
    best = None
    limited = False
    for k in range(min(N + 1, z.s)):
        v = z.components[k].valuation()
        if v is None:
            limited = True
        elif best is None or v < best:
            best = v
    return best, limited or best is None


@dataclass
class ValuationReport:
    v_le: dict[int, Fraction | None]
    w_r: dict[Fraction, Fraction | None]
    overconvergence_radius: Fraction | None
    precision_limited: bool = False


@dataclass(frozen=True)
class WeakNeighborhood:
    n: int
    h: int


def w_r_valuation(z: WittVector, radii, N: int | None = None) -> ValuationReport:
    """Report of v_E^{<=N} and w_r(z) = inf_k (r v_E(z_k) + k) over the window."""
    if N is None:
        N = z.s - 1
    v_le = {}
    limited = False
    for k in range(N + 1):
        v, flag = v_le_n(z, k)
        v_le[k] = v
        limited = limited or flag
    w_r: dict[Fraction, Fraction | None] = {}
    best_radius = None
    for r in radii:
        r = Fraction(r)
        vals = []
        any_unknown = False
        for k in range(z.s):
            v = z.components[k].valuation()
            if v is None:
                any_unknown = True
                continue
            # w_r reads component valuations on the p-normalized scale
            vals.append(r * flat_normalization(v, z.p) + k)
        w_r[r] = min(vals) if vals else None
        limited = limited or any_unknown
        if vals and (best_radius is None or r > best_radius):
            best_radius = r
    return ValuationReport(v_le, w_r, best_radius, limited)


def pi_witt(p: int, s: int, prec: Fraction | int) -> WittVector:
    """pi = [eps] - 1 in Witt coordinates, eps = 1 + pi-bar."""
    prec = math.floor(prec)
    eps = NormFieldElement.from_terms(p, {Fraction(0): 1, Fraction(1): 1}, prec)
    one = NormFieldElement.one(p, prec)
    return witt_sub(teichmuller(eps, s), teichmuller(one, s))


def weak_membership(z: WittVector, U: WeakNeighborhood) -> bool:
    """Decide z in p^n A + pi^h A^+ from Witt coordinates.

    Modulo p^n the neighborhood is pi^h W_n(E^+); dividing by pi^h (Witt
    division via Newton inversion) reduces the test to nonnegativity of the
    first n component valuations.
    """
    if U.n == 0:
        return True
    if U.n > z.s:
        raise PrecisionError("neighborhood finer than the stored length")
    prec = min(c.prec for c in z.components)
    if prec <= U.h:
        raise PrecisionError("window does not dominate the pi-power h")
    pw = pi_witt(z.p, z.s, prec + 2 * U.h + 2)
    inv = witt_inverse(pw)
    w = z
    for _ in range(U.h):
        w = witt_mul(w, inv)
    for k in range(U.n):
        v = w.components[k].valuation()
        if v is not None and v < 0:
            return False
    return True
