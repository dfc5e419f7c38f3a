"""Truncated divided power algebras over F_p.

An algebra is determined by a prime p and heights (m_1, ..., m_n): it has a
monomial basis x_1^(a_1)...x_n^(a_n) with 0 <= a_i < p^{m_i}, multiplication
x^(r) x^(s) = C(r+s, r) x^(r+s), and dimension p^{m_1+...+m_n}.  Elements are
sparse dicts {exponent tuple: nonzero coefficient}.

Divided powers f^(r) are computed in the free algebra (no exponent caps) and
only then tested against the truncation; a result with an out-of-range
exponent carrying a nonzero coefficient raises OutOfAlgebraError.  Plain
products, by contrast, truncate exactly: a product exponent that overflows
p^{m_i} forces a base-p carry past position m_i - 1, so its binomial
coefficient vanishes mod p.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .gfp import check_prime, inv_scalar

Mono = tuple  # exponent vector


@dataclass(frozen=True)
class FlagSpec:
    """Prime and heights; fixes the algebra and everything built on it."""
    p: int
    heights: tuple

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "heights", tuple(int(m) for m in self.heights))
        if len(self.heights) < 1 or any(m < 1 for m in self.heights):
            raise ValueError("heights must be a nonempty tuple of integers >= 1")

    @property
    def n(self) -> int:
        return len(self.heights)

    @property
    def caps(self) -> tuple:
        return tuple(self.p ** m for m in self.heights)

    @property
    def dim(self) -> int:
        return self.p ** sum(self.heights)

    @property
    def top_degree(self) -> int:
        """Largest total degree of a basis monomial; m^(k) = 0 beyond it."""
        return sum(self.p ** m - 1 for m in self.heights)

    def zero_mono(self) -> Mono:
        return (0,) * self.n

    def monomials(self):
        """All basis monomials, lexicographic in the exponent vector."""
        def rec(i):
            if i < 0:
                yield ()
                return
            for head in rec(i - 1):
                for a in range(self.caps[i]):
                    yield head + (a,)
        return rec(self.n - 1)

    def heights_multiset(self) -> tuple:
        return tuple(sorted(self.heights))


class OutOfAlgebraError(Exception):
    """A divided power left the truncated algebra."""

    def __init__(self, mono=None, msg=None):
        self.mono = mono
        super().__init__(msg or f"divided power escapes the algebra at {mono}")


@lru_cache(maxsize=None)
def _fact_val_unit(m: int, p: int) -> tuple[int, int]:
    """(v_p(m!), unit part of m! mod p) via Legendre and Wilson recursion."""
    if m < p:
        u = 1
        for i in range(2, m + 1):
            u = (u * i) % p
        return 0, u
    q, r = divmod(m, p)
    v_rest, u_rest = _fact_val_unit(q, p)
    _, u_low = _fact_val_unit(r, p)
    sign = (p - 1) if q % 2 else 1  # (-1)^q from Wilson on each full block
    return q + v_rest, (sign * u_low * u_rest) % p


def binom_lucas(n: int, k: int, p: int) -> int:
    """C(n, k) mod p by Lucas' theorem."""
    if k < 0 or k > n:
        return 0
    out = 1
    while n or k:
        nd, kd = n % p, k % p
        if kd > nd:
            return 0
        num = 1
        for i in range(kd):
            num = num * (nd - i) % p
        den = 1
        for i in range(1, kd + 1):
            den = den * i % p
        out = out * num * inv_scalar(den, p) % p
        n //= p
        k //= p
    return out


@lru_cache(maxsize=1 << 16)
def mono_dp_coeff(alpha: Mono, r: int, p: int) -> int:
    """Coefficient of (x^(alpha))^(r) = c * x^(r*alpha), exactly mod p.

    c = prod_i (r*a_i)! / (r! * prod_i (a_i!)^r); evaluated through p-adic
    valuations (Legendre) and factorial unit parts, never through big
    integers.  A positive valuation means c = 0 mod p.
    """
    val = 0
    unit = 1
    for a in alpha:
        v, u = _fact_val_unit(r * a, p)
        val += v
        unit = unit * u % p
    v, u = _fact_val_unit(r, p)
    val -= v
    unit = unit * inv_scalar(u, p) % p
    for a in alpha:
        v, u = _fact_val_unit(a, p)
        val -= r * v
        unit = unit * pow(inv_scalar(u, p), r, p) % p
    assert val >= 0, "divided power coefficient has negative valuation"
    return 0 if val > 0 else unit


def _digits(r: int, p: int) -> list[int]:
    out = []
    while r:
        out.append(r % p)
        r //= p
    return out


class AlgebraElement:
    """Sparse element of O(F) (or of the free algebra during divided powers)."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: FlagSpec, terms: dict | None = None):
        self.spec = spec
        self.terms = {m: c % spec.p for m, c in (terms or {}).items() if c % spec.p}

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(spec: FlagSpec) -> "AlgebraElement":
        return AlgebraElement(spec, {})

    @staticmethod
    def one(spec: FlagSpec) -> "AlgebraElement":
        return AlgebraElement(spec, {spec.zero_mono(): 1})

    @staticmethod
    def scalar(spec: FlagSpec, c: int) -> "AlgebraElement":
        return AlgebraElement(spec, {spec.zero_mono(): c})

    @staticmethod
    def monomial(spec: FlagSpec, mono, coeff: int = 1) -> "AlgebraElement":
        mono = tuple(int(a) for a in mono)
        if len(mono) != spec.n or any(a < 0 for a in mono):
            raise ValueError(f"bad exponent vector {mono}")
        if any(a >= cap for a, cap in zip(mono, spec.caps)):
            raise OutOfAlgebraError(mono)
        return AlgebraElement(spec, {mono: coeff})

    @staticmethod
    def generator(spec: FlagSpec, i: int, power: int = 1) -> "AlgebraElement":
        """x_i^(power), 0-based index."""
        mono = [0] * spec.n
        mono[i] = power
        return AlgebraElement.monomial(spec, tuple(mono))

    # -- basics --------------------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and self.spec == other.spec \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.spec, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return f"<{render_element(self)}>"

    def constant_term(self) -> int:
        return self.terms.get(self.spec.zero_mono(), 0)

    def is_unit(self) -> bool:
        return self.constant_term() != 0

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        p = self.spec.p
        for m, c in other.terms.items():
            out[m] = (out.get(m, 0) + c) % p
        return AlgebraElement(self.spec, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c: int) -> "AlgebraElement":
        c %= self.spec.p
        return AlgebraElement(self.spec, {m: a * c for m, a in self.terms.items()})

    def _check(self, other):
        if self.spec != other.spec:
            raise ValueError("algebra mismatch")

    # -- multiplication ------------------------------------------------------

    def __mul__(self, other):
        """Truncated product; exact because dropped terms vanish mod p."""
        self._check(other)
        p = self.spec.p
        caps = self.spec.caps
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                coeff = c1 * c2 % p
                mono = []
                for a, b, cap in zip(m1, m2, caps):
                    s = a + b
                    if s >= cap:
                        coeff = 0
                        break
                    coeff = coeff * binom_lucas(s, a, p) % p
                    if not coeff:
                        break
                    mono.append(s)
                if coeff:
                    key = tuple(mono)
                    out[key] = (out.get(key, 0) + coeff) % p
        return AlgebraElement(self.spec, out)

    def mul_free(self, other) -> "AlgebraElement":
        """Product in the free divided power algebra (no truncation)."""
        self._check(other)
        p = self.spec.p
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                coeff = c1 * c2 % p
                mono = []
                for a, b in zip(m1, m2):
                    s = a + b
                    coeff = coeff * binom_lucas(s, a, p) % p
                    if not coeff:
                        break
                    mono.append(s)
                if coeff:
                    key = tuple(mono)
                    out[key] = (out.get(key, 0) + coeff) % p
        return AlgebraElement(self.spec, out)

    # -- structure queries ----------------------------------------------------

    def filtration_degree(self):
        """min |alpha| over the support; None for the zero element."""
        if not self.terms:
            return None
        return min(sum(m) for m in self.terms)

    def in_filtration(self, k: int) -> bool:
        return all(sum(m) >= k for m in self.terms)

    def in_maximal_ideal(self) -> bool:
        return self.constant_term() == 0

    def in_m2(self) -> bool:
        """Membership in m(F)^2: no constant, no pure-power monomials."""
        return all(sum(m) >= 2 and not _is_pure_power(m, self.spec.p)
                   for m in self.terms)

    def in_C_k(self, k: int) -> bool:
        """f^(p^k) stays in O(F); monomial-wise basis test."""
        if self.constant_term():
            raise ValueError("C_k is only defined inside the maximal ideal")
        for m in self.terms:
            pw = _is_pure_power(m, self.spec.p)
            if pw is None:
                continue
            i, l = pw
            if l + k >= self.spec.heights[i]:
                return False
        return True

    def partial(self, i: int) -> "AlgebraElement":
        """The partial derivative d/dx_i: x_i^(k) -> x_i^(k-1)."""
        out = {}
        p = self.spec.p
        for m, c in self.terms.items():
            if m[i]:
                key = m[:i] + (m[i] - 1,) + m[i + 1:]
                out[key] = (out.get(key, 0) + c) % p
        return AlgebraElement(self.spec, out)

    def linear_part(self) -> list:
        """Coefficients of x_1, ..., x_n."""
        out = []
        for i in range(self.spec.n):
            mono = tuple(1 if j == i else 0 for j in range(self.spec.n))
            out.append(self.terms.get(mono, 0))
        return out

    # -- divided powers, exp, units -------------------------------------------

    def _dp_free_p(self) -> "AlgebraElement":
        """f^(p) in the free algebra by the multinomial addition rule."""
        p = self.spec.p
        items = list(self.terms.items())
        out = AlgebraElement.zero(self.spec)

        def rec(idx, remaining, acc):
            nonlocal out
            if idx == len(items):
                if remaining == 0:
                    out = out + acc
                return
            mono, c = items[idx]
            choices = range(remaining + 1) if idx < len(items) - 1 else [remaining]
            for beta in choices:
                coeff = mono_dp_coeff(mono, beta, p) if beta else 1
                coeff = coeff * pow(c, beta, p) % p
                if not coeff:
                    continue
                piece = AlgebraElement(
                    self.spec, {tuple(a * beta for a in mono): coeff})
                rec(idx + 1, remaining - beta, acc.mul_free(piece))

        rec(0, p, AlgebraElement.one(self.spec))
        return out

    def dp_free(self, r: int) -> "AlgebraElement":
        """f^(r) in the free algebra, for f with zero constant term."""
        if r < 0:
            raise ValueError("negative divided power")
        if self.constant_term():
            raise ValueError("divided powers need a zero constant term")
        p = self.spec.p
        if r == 0:
            return AlgebraElement.one(self.spec)
        digits = _digits(r, p)
        # f^(p^k) by iterating the tower rule; assemble composite r base p
        powers = [self]
        for _ in range(len(digits) - 1):
            powers.append(powers[-1]._dp_free_p())
        out = AlgebraElement.one(self.spec)
        unit = 1
        for d, g in zip(digits, powers):
            for _ in range(d):
                out = out.mul_free(g)
            fact = 1
            for i in range(2, d + 1):
                fact = fact * i % p
            unit = unit * fact % p
        return out.scale(inv_scalar(unit, p))

    def divided_power(self, r: int) -> "AlgebraElement":
        """f^(r) inside O(F); raises OutOfAlgebraError if it escapes."""
        out = self.dp_free(r)
        caps = self.spec.caps
        for m in out.terms:
            for a, cap in zip(m, caps):
                if a >= cap:
                    raise OutOfAlgebraError(m)
        return out

    def all_dp_interior(self) -> bool:
        """True iff every divided power f^(r) stays in O(F), i.e. f in m^2."""
        return self.in_m2()

    def exp_interior(self) -> "AlgebraElement":
        """exp(f) = sum f^(r) for f with all divided powers interior."""
        if self.constant_term():
            raise ValueError("exp needs a zero constant term")
        if not self.in_m2():
            bad = next(m for m in self.terms if _is_pure_power(m, self.spec.p))
            raise OutOfAlgebraError(bad, "exp escapes O(F): pure-power term "
                                    f"{bad} has an escaping divided power")
        p = self.spec.p
        top = self.spec.top_degree
        digits_len = len(_digits(top, p)) if top else 1
        powers = [self]
        for _ in range(digits_len - 1):
            powers.append(powers[-1]._dp_free_p())
        caps = self.spec.caps
        for g in powers:
            assert all(a < cap for m in g.terms for a, cap in zip(m, caps)), \
                "interior divided power escaped"
        out = AlgebraElement.one(self.spec)
        for r in range(1, top + 1):
            term = AlgebraElement.one(self.spec)
            unit = 1
            for d, g in zip(_digits(r, p), powers):
                for _ in range(d):
                    term = term * g
                fact = 1
                for i in range(2, d + 1):
                    fact = fact * i % p
                unit = unit * fact % p
            out = out + term.scale(inv_scalar(unit, p))
        return out

    def invert_unit(self) -> "AlgebraElement":
        """Inverse of a unit via the geometric series of the nilpotent part."""
        c = self.constant_term()
        if not c:
            raise ValueError("not a unit: zero constant term")
        p = self.spec.p
        cinv = inv_scalar(c, p)
        nil = AlgebraElement(self.spec, dict(self.terms))
        nil.terms.pop(self.spec.zero_mono(), None)
        nil = nil.scale(cinv)
        # (1 + n)^{-1} = 1 - n + n^2 - ...; n is nilpotent by filtration
        out = AlgebraElement.one(self.spec)
        power = AlgebraElement.one(self.spec)
        sign = 1
        for _ in range(self.spec.top_degree):
            power = power * nil
            sign = -sign
            if not power:
                break
            out = out + power.scale(sign)
        return out.scale(cinv)


def _is_pure_power(mono: Mono, p: int):
    """(i, l) if mono = x_i^(p^l), else None; the constant is not pure."""
    nz = [(i, a) for i, a in enumerate(mono) if a]
    if len(nz) != 1:
        return None
    i, a = nz[0]
    l = 0
    while a % p == 0:
        a //= p
        l += 1
    return (i, l) if a == 1 else None


def C_k_basis_count(spec: FlagSpec, k: int) -> int:
    """Dimension of C_k(F): all of m(F) minus the excluded pure powers."""
    total = spec.dim - 1
    excluded = 0
    for m in spec.heights:
        # pure powers x_i^(p^l) with l + k >= m and l < m (so the power is
        # inside the algebra)
        excluded += len([l for l in range(m) if l + k >= m])
    return total - excluded


def in_C_k_mono(mono: Mono, k: int, spec: FlagSpec) -> bool:
    pw = _is_pure_power(mono, spec.p)
    if pw is None:
        return True
    i, l = pw
    return l + k < spec.heights[i]


def render_element(f: AlgebraElement) -> str:
    """Canonical text: `1 + 2*x1^(2)*x2`, lexicographic term order."""
    if not f.terms:
        return "0"
    parts = []
    for mono, c in f.sorted_terms():
        factors = []
        for i, a in enumerate(mono):
            if a == 0:
                continue
            name = f"x{i + 1}"
            factors.append(name if a == 1 else f"{name}^({a})")
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append(f"{c}*" + "*".join(factors))
    return " + ".join(parts)


_MONO_POOLS: dict = {}


def _mono_pool(spec: FlagSpec, in_m: bool, in_m2: bool) -> list:
    key = (spec.p, spec.heights, in_m, in_m2)
    pool = _MONO_POOLS.get(key)
    if pool is None:
        pool = []
        for mono in spec.monomials():
            if (in_m or in_m2) and sum(mono) == 0:
                continue
            if in_m2 and (sum(mono) < 2 or _is_pure_power(mono, spec.p)):
                continue
            pool.append(mono)
        _MONO_POOLS[key] = pool
    return pool


def random_element(rng, spec: FlagSpec, max_terms: int = 3, *,
                   in_m: bool = True, in_m2: bool = False) -> AlgebraElement:
    """Random sparse element for fuzzing, from the admissible monomial pool."""
    pool = _mono_pool(spec, in_m, in_m2)
    if not pool:
        return AlgebraElement.zero(spec)
    terms = {pool[rng.randrange(len(pool))]: rng.randrange(1, spec.p)
             for _ in range(max_terms)}
    return AlgebraElement(spec, terms)
