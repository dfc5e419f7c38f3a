"""Exact linear algebra over F_p: subspaces, flags, pairings, canonical forms.

Subspaces are reduced row-echelon matrices (numpy int64, entries in [0, p)),
so equal subspaces are equal arrays.  Maps use the column convention: a matrix
A of shape (m, n) sends a column vector v in F_p^n to A @ v in F_p^m; a
pairing b: V x U -> K is a matrix of shape (dim V, dim U) with
b(v, u) = v^T b u.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SUPPORTED_PRIMES = (2, 3, 5, 7, 11, 13)

# Flag labels beyond the finite range; INF sorts after every integer and INF1
# after INF.  All six flag shapes share one representation (see FlagChain).
INF = "oo"
INF1 = "oo+1"


def check_prime(p: int) -> None:
    if p not in SUPPORTED_PRIMES:
        raise ValueError(f"unsupported prime {p}; expected one of {SUPPORTED_PRIMES}")


def modp(A, p: int) -> np.ndarray:
    return np.asarray(A, dtype=np.int64) % p


def zeros(m: int, n: int) -> np.ndarray:
    return np.zeros((m, n), dtype=np.int64)


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


@lru_cache(maxsize=None)
def _inverse_table(p: int) -> tuple:
    return (0,) + tuple(pow(a, p - 2, p) for a in range(1, p))


def inv_scalar(a: int, p: int) -> int:
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError("0 is not invertible mod p")
    return _inverse_table(p)[a]


def rref(A, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p; returns (R, pivot columns)."""
    A = modp(np.atleast_2d(A), p)
    m, n = A.shape
    if m * n <= 256:
        return _rref_small(A, p, m, n)
    A = A.copy()
    r = 0
    pivots: list[int] = []
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * inv_scalar(int(A[r, c]), p)) % p
        col = A[:, c].copy()
        col[r] = 0
        if np.any(col):
            A -= np.outer(col, A[r])
            A %= p
        pivots.append(c)
        r += 1
    return A, pivots


def _rref_small(A, p: int, m: int, n: int) -> tuple[np.ndarray, list[int]]:
    """Pure-python elimination; faster than numpy under ~16x16."""
    rows = [list(map(int, row)) for row in A]
    r = 0
    pivots: list[int] = []
    for c in range(n):
        if r == m:
            break
        piv = None
        for i in range(r, m):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
        inv = inv_scalar(rows[r][c], p)
        if inv != 1:
            rows[r] = [(x * inv) % p for x in rows[r]]
        base = rows[r]
        for i in range(m):
            f = rows[i][c]
            if f and i != r:
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], base)]
        pivots.append(c)
        r += 1
    return np.array(rows, dtype=np.int64).reshape(m, n), pivots


def row_space(A, p: int) -> np.ndarray:
    """Canonical basis (rref with zero rows dropped) of the row space."""
    if A.shape[0] == 0:
        return modp(A, p)
    R, pivots = rref(A, p)
    return R[: len(pivots)]


def rank(A, p: int) -> int:
    if A.shape[0] == 0 or A.shape[1] == 0:
        return 0
    return len(rref(A, p)[1])


def empty_space(n: int) -> np.ndarray:
    return zeros(0, n)


def full_space(n: int) -> np.ndarray:
    return eye(n)


def nullspace(A, p: int) -> np.ndarray:
    """Row basis of {x : A @ x = 0}."""
    A = modp(np.atleast_2d(A), p)
    m, n = A.shape
    if m == 0:
        return full_space(n)
    R, pivots = rref(A, p)
    free = [c for c in range(n) if c not in pivots]
    basis = zeros(len(free), n)
    for k, c in enumerate(free):
        basis[k, c] = 1
        for r, pc in enumerate(pivots):
            basis[k, pc] = (-R[r, c]) % p
    return row_space(basis, p)


def left_nullspace(A, p: int) -> np.ndarray:
    """Row basis of {x : x @ A = 0}."""
    return nullspace(modp(A, p).T, p)


def solve(A, b, p: int) -> np.ndarray | None:
    """One solution x of A @ x = b, or None if inconsistent."""
    A = modp(np.atleast_2d(A), p)
    b = modp(b, p).reshape(-1)
    m, n = A.shape
    aug = np.concatenate([A, b.reshape(-1, 1)], axis=1)
    R, pivots = rref(aug, p)
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = R[r, n]
    return x


def solve_rows(B, v, p: int) -> np.ndarray | None:
    """Coefficients c with c @ B = v, or None if v is outside the row space."""
    B = modp(np.atleast_2d(B), p)
    if B.shape[0] == 0:
        return np.zeros(0, dtype=np.int64) if not np.any(modp(v, p)) else None
    return solve(B.T, v, p)


def inverse(A, p: int) -> np.ndarray:
    A = modp(A, p)
    n = A.shape[0]
    aug = np.concatenate([A, eye(n)], axis=1)
    R, pivots = rref(aug, p)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular mod p")
    return R[:, n:]


def is_invertible(A, p: int) -> bool:
    A = modp(A, p)
    return A.shape[0] == A.shape[1] and rank(A, p) == A.shape[0]


def det(A, p: int) -> int:
    """Determinant over F_p by elimination."""
    A = modp(A, p).copy()
    n = A.shape[0]
    if n == 0:
        return 1
    d = 1
    for c in range(n):
        piv = None
        for r in range(c, n):
            if A[r, c]:
                piv = r
                break
        if piv is None:
            return 0
        if piv != c:
            A[[c, piv]] = A[[piv, c]]
            d = (-d) % p
        d = (d * int(A[c, c])) % p
        inv = inv_scalar(int(A[c, c]), p)
        A[c] = (A[c] * inv) % p
        for r in range(c + 1, n):
            if A[r, c]:
                A[r] = (A[r] - A[r, c] * A[c]) % p
    return d % p


def random_matrix(rng, m: int, n: int, p: int) -> np.ndarray:
    return np.array([[rng.randrange(p) for _ in range(n)] for _ in range(m)],
                    dtype=np.int64)


def random_invertible(rng, n: int, p: int) -> np.ndarray:
    if n == 0:
        return zeros(0, 0)
    while True:
        A = random_matrix(rng, n, n, p)
        if is_invertible(A, p):
            return A


# ---------------------------------------------------------------------------
# Subspace calculus.  A subspace of F_p^n is an rref row matrix (k, n).
# ---------------------------------------------------------------------------

def subspace_sum(A, B, p: int) -> np.ndarray:
    if A.shape[1] != B.shape[1]:
        raise ValueError("ambient dimension mismatch")
    return row_space(np.concatenate([A, B], axis=0), p)


def subspace_intersection(A, B, p: int) -> np.ndarray:
    if A.shape[1] != B.shape[1]:
        raise ValueError("ambient dimension mismatch")
    if A.shape[0] == 0 or B.shape[0] == 0:
        return empty_space(A.shape[1])
    # (a | b) in the left kernel of [A; -B] means a@A = b@B.
    stacked = np.concatenate([A, (-B) % p], axis=0)
    coeffs = left_nullspace(stacked, p)
    vecs = modp(coeffs[:, : A.shape[0]] @ A, p)
    return row_space(vecs, p)


def subspace_contains(A, v, p: int) -> bool:
    return solve_rows(A, v, p) is not None


def subspace_eq(A, B) -> bool:
    return A.shape == B.shape and np.array_equal(A, B)


def subspace_leq(A, B, p: int) -> bool:
    """A subseteq B, both rref."""
    if A.shape[0] == 0:
        return True
    if A.shape[0] > B.shape[0]:
        return False
    return rank(np.concatenate([B, A], axis=0), p) == B.shape[0]


def map_rows(M, S, p: int) -> np.ndarray:
    """Row basis of the image of the subspace S under v -> M @ v."""
    if S.shape[0] == 0:
        return empty_space(M.shape[0])
    return row_space(modp(S @ modp(M, p).T, p), p)


def preimage_rows(M, S, p: int) -> np.ndarray:
    """Row basis of {v : M @ v in row space of S}."""
    n_out, n_in = M.shape
    comp = quotient_section(S, full_space(n_out), p)
    if comp.shape[0] == 0:
        return full_space(n_in)
    proj = quotient_projection(S, comp, p)
    return nullspace(modp(proj @ modp(M, p), p), p)


def quotient_section(sub, sup, p: int) -> np.ndarray:
    """Greedy-pivot complement basis of `sub` inside `sup` (rows in ambient).

    Reduces the rows of rref(sup) against `sub` in order and keeps the ones
    that add a new pivot; the chosen rows have zero coordinates at all of
    sub's pivot columns, so their span meets `sub` trivially.
    """
    sub = row_space(sub, p)
    sup = row_space(sup, p)
    if sub.shape[0] == 0:
        return sup
    rows = [(int(np.nonzero(r)[0][0]), r) for r in sub]
    chosen = []
    for v in sup:
        v = v.copy()
        for c, w in rows:
            if v[c]:
                v = (v - v[c] * w) % p
        if np.any(v):
            c = int(np.nonzero(v)[0][0])
            v = (v * inv_scalar(int(v[c]), p)) % p
            rows.append((c, v))
            chosen.append(v)
    if not chosen:
        return empty_space(sub.shape[1])
    return row_space(np.array(chosen, dtype=np.int64), p)


def quotient_projection(sub, section, p: int) -> np.ndarray:
    """Matrix P with P @ v = section-coordinates of v modulo sub.

    Valid on sub + span(section); callers must stay inside that space.
    """
    n = sub.shape[1]
    k = section.shape[0]
    if k == 0:
        return zeros(0, n)
    B = np.concatenate([sub, section], axis=0)
    R, pivots = rref(B, p)
    C = _transform_to_rref(B, p)
    coord = zeros(B.shape[0], n)
    for r, c in enumerate(pivots):
        coord[r, c] = 1
    # v = (coord @ v) in R-coordinates; R-coords -> B-coords via C^T.
    full = modp(C.T @ coord, p)
    return full[sub.shape[0]:, :]


def _transform_to_rref(B, p: int) -> np.ndarray:
    """C with C @ B = rref(B), for B with independent rows."""
    m = B.shape[0]
    aug = np.concatenate([modp(B, p), eye(m)], axis=1)
    R, _ = rref(aug, p)
    return R[:, B.shape[1]:]


@dataclass(frozen=True)
class Factor:
    """A quotient sup/sub with a chosen section basis (rows in ambient)."""
    sub: np.ndarray
    sup: np.ndarray
    section: np.ndarray
    p: int

    @property
    def dim(self) -> int:
        return self.section.shape[0]

    @property
    def ambient(self) -> int:
        return self.sub.shape[1]

    def lift(self) -> np.ndarray:
        """Section rows: factor coordinates -> ambient representatives."""
        return self.section

    def project_vectors(self, vecs: np.ndarray) -> np.ndarray:
        """Factor coordinates of ambient row vectors (must lie in sup)."""
        if vecs.shape[0] == 0 or self.dim == 0:
            return zeros(vecs.shape[0], self.dim)
        P = quotient_projection(self.sub, self.section, self.p)
        return modp(vecs @ P.T, self.p)

    def image_of(self, S: np.ndarray) -> np.ndarray:
        """Image of a subspace S: ((S ∩ sup) + sub)/sub, in factor coords."""
        inter = subspace_intersection(S, self.sup, self.p)
        return row_space(self.project_vectors(inter), self.p)


def make_factor(sub, sup, p: int) -> Factor:
    sub = row_space(sub, p)
    sup = row_space(sup, p)
    return Factor(sub, sup, quotient_section(sub, sup, p), p)


# ---------------------------------------------------------------------------
# Flags.  One representation covers all six shapes: spaces at finite labels
# 0..L (constant beyond L) plus entries at INF and INF1.  Increasing flags
# have factors Φ_q = F(q+1)/F(q) and Φ_oo = F(oo+1)/F(oo); decreasing flags
# have Φ_q = F(q)/F(q+1) and Φ_oo = F(oo)/F(oo+1).  Shapes without an
# infinity slot simply carry a zero factor there.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlagChain:
    ambient_dim: int
    direction: str                      # "inc" | "dec"
    finite: tuple                       # rref arrays at labels 0..L
    inf: np.ndarray
    inf1: np.ndarray
    p: int

    def __post_init__(self):
        object.__setattr__(self, "_factor_cache", {})

    def space(self, label):
        if label == INF:
            return self.inf
        if label == INF1:
            return self.inf1
        if label >= len(self.finite):
            return self.finite[-1]
        return self.finite[label]

    def factor(self, label) -> Factor:
        cached = self._factor_cache.get(label)
        if cached is not None:
            return cached
        if label == INF1:
            raise ValueError("oo+1 does not name a factor")
        if label == INF:
            sub, sup = (self.inf1, self.inf) if self.direction == "dec" else (self.inf, self.inf1)
        elif self.direction == "inc":
            sub, sup = self.space(label), self.space(label + 1)
        else:
            sub, sup = self.space(label + 1), self.space(label)
        out = make_factor(sub, sup, self.p)
        self._factor_cache[label] = out
        return out

    def factor_labels(self) -> list:
        """Labels with a nonzero factor: finite ones first, then INF."""
        out = [q for q in range(len(self.finite)) if self.factor(q).dim > 0]
        if self.factor(INF).dim > 0:
            out.append(INF)
        return out

    def is_trivial(self) -> bool:
        """No space strictly between 0 and the ambient space."""
        spaces = list(self.finite) + [self.inf, self.inf1]
        return all(S.shape[0] in (0, self.ambient_dim) for S in spaces)

    def check(self) -> None:
        seq = list(self.finite) + [self.inf, self.inf1]
        if self.direction == "dec":
            seq = seq[::-1]
        for A, B in zip(seq, seq[1:]):
            assert subspace_leq(A, B, self.p), "flag not monotone"


def make_flag(ambient_dim: int, direction: str, finite_spaces, p: int,
              inf=None, inf1=None) -> FlagChain:
    fin = tuple(row_space(np.asarray(S, dtype=np.int64), p) for S in finite_spaces)
    inf = fin[-1] if inf is None else row_space(np.asarray(inf, dtype=np.int64), p)
    if inf1 is None:
        inf1 = full_space(ambient_dim) if direction == "inc" else empty_space(ambient_dim)
    else:
        inf1 = row_space(np.asarray(inf1, dtype=np.int64), p)
    flag = FlagChain(ambient_dim, direction, fin, inf, inf1, p)
    flag.check()
    return flag


def increasing_flag_from_dims(dims, ambient: int, p: int) -> FlagChain:
    """0 = V_0 ⊆ V_1 ⊆ ... with V_i spanned by the first dims[i] coordinates."""
    spaces = [empty_space(ambient)] + [eye(ambient)[:d] for d in dims]
    return make_flag(ambient, "inc", spaces, p)


def only_inf_flag(ambient_dim: int, direction: str, p: int) -> FlagChain:
    """The flag whose single nonzero factor sits at the infinity slot."""
    if direction == "inc":
        return make_flag(ambient_dim, "inc", [empty_space(ambient_dim)], p)
    return make_flag(ambient_dim, "dec", [full_space(ambient_dim)], p)


# ---------------------------------------------------------------------------
# Pairings and orthogonals.
# ---------------------------------------------------------------------------

def orthogonal_subspace(b, M, p: int, side: str = "right") -> np.ndarray:
    """Orthogonal of M under the pairing b: V x U -> K.

    side="right": M ⊆ U, returns {v in V : b(v, M) = 0}.
    side="left":  M ⊆ V, returns {u in U : b(M, u) = 0}.
    """
    b = modp(b, p)
    if side == "right":
        if M.shape[1] != b.shape[1]:
            raise ValueError("dimension mismatch")
        if M.shape[0] == 0:
            return full_space(b.shape[0])
        return left_nullspace(modp(b @ M.T, p), p)
    if side == "left":
        if M.shape[1] != b.shape[0]:
            raise ValueError("dimension mismatch")
        if M.shape[0] == 0:
            return full_space(b.shape[1])
        return nullspace(modp(M @ b, p), p)
    raise ValueError(f"bad side {side!r}")


def pairing_nondegenerate(b, p: int) -> bool:
    b = modp(b, p)
    return b.shape[0] == b.shape[1] and rank(b, p) == b.shape[0]


def transfer_flag_via_pairing(b, F: FlagChain, target: FlagChain, k, p: int) -> FlagChain:
    """Transfer F (living on the right factor of b) into Φ_k(target).

    The label-q space of the result is the image in Φ_k(target) of the
    b-orthogonal of F(q).  The direction flips; the oo+1 entry is forced by
    the resulting shape (zero for decreasing, everything for increasing).
    """
    fac = target.factor(k)
    if fac.dim == 0:
        raise ValueError(f"label {k} names an empty factor")
    new_dir = "dec" if F.direction == "inc" else "inc"
    fin = tuple(fac.image_of(orthogonal_subspace(b, F.space(q), p, side="right"))
                for q in range(len(F.finite)))
    inf = fac.image_of(orthogonal_subspace(b, F.inf, p, side="right"))
    inf1 = empty_space(fac.dim) if new_dir == "dec" else full_space(fac.dim)
    flag = FlagChain(fac.dim, new_dir, fin, inf, inf1, p)
    flag.check()
    return flag


def transfer_flag_via_iso(mu, F: FlagChain, target: FlagChain, k, p: int,
                          mode: str = "preimage") -> FlagChain:
    """Transfer F into Φ_k(target) through an isomorphism mu.

    mode="preimage" builds (mu^{-1} F)_{Φ_k target} (F lives on mu's
    codomain); mode="image" builds (mu F)_{Φ_k target} (F on mu's domain).
    The direction is preserved.
    """
    fac = target.factor(k)
    if fac.dim == 0:
        raise ValueError(f"label {k} names an empty factor")

    def move(S):
        return preimage_rows(mu, S, p) if mode == "preimage" else map_rows(mu, S, p)

    fin = tuple(fac.image_of(move(F.space(q))) for q in range(len(F.finite)))
    inf = fac.image_of(move(F.inf))
    inf1 = fac.image_of(move(F.inf1))
    flag = FlagChain(fac.dim, F.direction, fin, inf, inf1, p)
    flag.check()
    return flag


def induced_pairing(b, flag_V: FlagChain, flag_U: FlagChain, i, j, p: int) -> np.ndarray:
    """Nondegenerate pairing between transferred-flag factors.

    Pairs Φ_j of the flag transferred from flag_U into Φ_i(flag_V) with Φ_i
    of the flag transferred from flag_V into Φ_j(flag_U); values are read on
    section representatives lifted back to the two ambient spaces.
    """
    left_flag = transfer_flag_via_pairing(b, flag_U, flag_V, i, p)
    right_flag = transfer_flag_via_pairing(modp(-modp(b, p).T, p), flag_V, flag_U, j, p)
    lf = left_flag.factor(j)
    rf = right_flag.factor(i)
    if lf.dim == 0 or rf.dim == 0:
        raise ValueError("zero factor on one side")
    L1 = modp(lf.lift() @ flag_V.factor(i).lift(), p)
    L2 = modp(rf.lift() @ flag_U.factor(j).lift(), p)
    out = modp(L1 @ modp(b, p) @ L2.T, p)
    if not pairing_nondegenerate(out, p):
        raise ValueError("induced pairing is degenerate")
    return out


def induced_iso(mu, flag_V: FlagChain, flag_U: FlagChain, k, l, p: int) -> np.ndarray:
    """The through map Φ_l((mu^{-1}F_U)_{Φ_k F_V}) -> Φ_k((mu F_V)_{Φ_l F_U}).

    A source class lifts to a representative in mu^{-1}(upper U space) + lower
    V space; the lower-V part is stripped so the representative genuinely lies
    in mu^{-1}(upper U space) ∩ (upper V space) before pushing through mu and
    reading the class in the target factor.
    """
    src_flag = transfer_flag_via_iso(mu, flag_U, flag_V, k, p, mode="preimage")
    dst_flag = transfer_flag_via_iso(mu, flag_V, flag_U, l, p, mode="image")
    sf = src_flag.factor(l)
    df = dst_flag.factor(k)
    if sf.dim != df.dim:
        raise ValueError("mismatched factors")
    fac_V = flag_V.factor(k)
    fac_U = flag_U.factor(l)
    lift = modp(sf.lift() @ fac_V.lift(), p)                   # rows in V
    pre = preimage_rows(mu, fac_U.sup, p)                      # mu^{-1}(upper U)
    stack = np.concatenate([pre, fac_V.sub], axis=0)
    fixed = []
    for row in lift:
        coeffs = solve_rows(stack, row, p)
        assert coeffs is not None, "representative outside mu^{-1}U + V_sub"
        fixed.append(modp(coeffs[: pre.shape[0]] @ pre, p))
    fixed = np.array(fixed, dtype=np.int64).reshape(len(fixed), lift.shape[1])
    moved = modp(fixed @ modp(mu, p).T, p)                     # rows in U-sup
    inner = fac_U.project_vectors(moved)                       # rows in Φ_l F_U
    out_rows = df.project_vectors(inner)
    M = out_rows.T                                             # column convention
    if not is_invertible(M, p):
        raise ValueError("induced map is not invertible")
    return M


# ---------------------------------------------------------------------------
# Polynomials over F_p: dense little-endian coefficient tuples.
# ---------------------------------------------------------------------------

def ptrim(f) -> tuple:
    f = [int(c) for c in f]
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def pdeg(f) -> int:
    return len(f) - 1


def pscale(f, c: int, p: int) -> tuple:
    return ptrim([(a * c) % p for a in f])


def pmul(f, g, p: int) -> tuple:
    f, g = ptrim(f), ptrim(g)
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, c in enumerate(g):
                out[i + j] = (out[i + j] + a * c) % p
    return ptrim(out)


def pdivmod(f, g, p: int) -> tuple[tuple, tuple]:
    f = list(ptrim(f))
    g = ptrim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    inv = inv_scalar(g[-1], p)
    q = [0] * max(0, len(f) - len(g) + 1)
    while len(f) >= len(g):
        if f[-1] == 0:
            f.pop()
            continue
        shift = len(f) - len(g)
        c = (f[-1] * inv) % p
        q[shift] = c
        for i, a in enumerate(g):
            f[shift + i] = (f[shift + i] - c * a) % p
        f.pop()
    return ptrim(q), ptrim(f)


def pmod(f, g, p: int) -> tuple:
    return pdivmod(f, g, p)[1]


def pmonic(f, p: int) -> tuple:
    f = ptrim(f)
    if not f:
        return f
    return pscale(f, inv_scalar(f[-1], p), p)


def pgcd(f, g, p: int) -> tuple:
    f, g = ptrim(f), ptrim(g)
    while g:
        f, g = g, pmod(f, g, p)
    return pmonic(f, p)


def pxgcd(f, g, p: int) -> tuple[tuple, tuple, tuple]:
    """(d, s, t) with s*f + t*g = d = monic gcd(f, g)."""
    r0, r1 = ptrim(f), ptrim(g)
    s0, s1 = (1,), ()
    t0, t1 = (), (1,)
    while r1:
        q, r = pdivmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, padd_(s0, pscale(pmul(q, s1, p), p - 1, p), p)
        t0, t1 = t1, padd_(t0, pscale(pmul(q, t1, p), p - 1, p), p)
    if not r0:
        return (), s0, t0
    c = inv_scalar(r0[-1], p)
    return pscale(r0, c, p), pscale(s0, c, p), pscale(t0, c, p)


def padd_(f, g, p: int) -> tuple:
    n = max(len(f), len(g))
    return ptrim([((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % p
                  for i in range(n)])


def plcm(f, g, p: int) -> tuple:
    f, g = ptrim(f), ptrim(g)
    if not f or not g:
        return ()
    d = pgcd(f, g, p)
    return pmonic(pdivmod(pmul(f, g, p), d, p)[0], p)


def ppow(f, e: int, p: int) -> tuple:
    out = (1,)
    f = ptrim(f)
    while e:
        if e & 1:
            out = pmul(out, f, p)
        f = pmul(f, f, p)
        e >>= 1
    return out


def peval_matrix(f, A, p: int) -> np.ndarray:
    """f(A) for a square matrix A (Horner)."""
    n = A.shape[0]
    out = zeros(n, n)
    coeffs = ptrim(f)
    if not coeffs:
        return out
    for c in reversed(coeffs):
        out = modp(out @ A, p)
        if c:
            out = modp(out + c * eye(n), p)
    return out


@lru_cache(maxsize=None)
def irreducibles(p: int, d: int) -> tuple:
    """All monic irreducible polynomials of degree d over F_p."""
    if d == 1:
        return tuple(((a % p, 1)) for a in range(p))
    lower = [q for dd in range(1, d // 2 + 1) for q in irreducibles(p, dd)]
    out = []
    for idx in range(p ** d):
        coeffs = []
        k = idx
        for _ in range(d):
            coeffs.append(k % p)
            k //= p
        f = tuple(coeffs) + (1,)
        if all(pmod(f, q, p) for q in lower):
            out.append(f)
    return tuple(out)


def pfactor(f, p: int) -> dict:
    """Factor a monic polynomial into irreducibles: {q: multiplicity}."""
    f = pmonic(f, p)
    if pdeg(f) == 0:
        return {}
    out: dict = {}
    d = 1
    while pdeg(f) > 0:
        assert d <= pdeg(f), "factorization failed"
        for q in irreducibles(p, d):
            while True:
                quo, rem = pdivmod(f, q, p)
                if rem:
                    break
                out[q] = out.get(q, 0) + 1
                f = quo
        d += 1
    return out


def companion(f, p: int) -> np.ndarray:
    """Companion matrix of a monic polynomial (column convention)."""
    f = pmonic(f, p)
    d = pdeg(f)
    C = zeros(d, d)
    for i in range(d - 1):
        C[i + 1, i] = 1
    for i in range(d):
        C[i, d - 1] = (-f[i]) % p
    return C


def poly_str(f) -> str:
    if not ptrim(f):
        return "0"
    parts = []
    for i, c in enumerate(f):
        if not c:
            continue
        if i == 0:
            parts.append(str(c))
        else:
            xs = "x" if i == 1 else f"x^{i}"
            parts.append(xs if c == 1 else f"{c}*{xs}")
    return " + ".join(reversed(parts))


# ---------------------------------------------------------------------------
# Rational canonical form (Frobenius form) with an explicit witness.
# ---------------------------------------------------------------------------

def krylov_rows(h, v, d: int, p: int) -> np.ndarray:
    rows = [modp(v, p).reshape(-1)]
    for _ in range(d - 1):
        rows.append(modp(h @ rows[-1], p))
    return np.array(rows, dtype=np.int64)


def local_min_poly(h, v, p: int) -> tuple:
    """Monic minimal polynomial of h on the cyclic subspace generated by v."""
    n = h.shape[0]
    v = modp(v, p).reshape(-1)
    if not np.any(v):
        return (1,)
    rows = [v]
    cur = v
    while True:
        cur = modp(h @ cur, p)
        B = np.array(rows, dtype=np.int64)
        dep = solve_rows(B, cur, p)
        if dep is not None:
            coeffs = [(-c) % p for c in dep] + [1]
            return ptrim(coeffs)
        rows.append(cur)
        assert len(rows) <= n + 1


def min_poly(h, p: int) -> tuple:
    n = h.shape[0]
    m = (1,)
    I = eye(n)
    for i in range(n):
        m = plcm(m, local_min_poly(h, I[i], p), p)
        if pdeg(m) == n:
            break
    return m


def max_vector(h, p: int) -> np.ndarray:
    """A vector whose local minimal polynomial is the full minimal polynomial."""
    n = h.shape[0]
    mu = min_poly(h, p)
    parts = []
    for q, e in pfactor(mu, p).items():
        cof = pdivmod(mu, ppow(q, e, p), p)[0]
        probe = peval_matrix(pmul(cof, ppow(q, e - 1, p), p), h, p)
        found = None
        I = eye(n)
        for i in range(n):
            if np.any(modp(probe @ I[i], p)):
                found = modp(peval_matrix(cof, h, p) @ I[i], p)
                break
        assert found is not None, "no vector attains the primary component"
        parts.append(found)
    v = parts[0]
    for w in parts[1:]:
        v = modp(v + w, p)
    assert local_min_poly(h, v, p) == mu
    return v


def _cyclic_generators(h, p: int) -> list[tuple[np.ndarray, tuple]]:
    """Cyclic decomposition generators, local polys in descending divisibility."""
    n = h.shape[0]
    if n == 0:
        return []
    v = max_vector(h, p)
    mu = local_min_poly(h, v, p)
    d = pdeg(mu)
    Z = krylov_rows(h, v, d, p)
    if d == n:
        return [(v, mu)]
    fac = make_factor(row_space(Z, p), full_space(n), p)
    section = fac.lift()
    # induced endomorphism on the quotient in section coordinates
    hbar = fac.project_vectors(modp(section @ h.T, p)).T
    out = [(v, mu)]
    for vbar, f in _cyclic_generators(modp(hbar, p), p):
        w = modp(vbar @ section, p)
        # correct w inside the cyclic space so its local polynomial is f
        fw = modp(peval_matrix(f, h, p) @ w, p)
        A = modp(peval_matrix(f, h, p) @ Z.T, p)
        coeffs = solve(A, fw, p)
        assert coeffs is not None, "cyclic lift failed"
        w = modp(w - coeffs @ Z, p)
        assert local_min_poly(h, w, p) == f
        out.append((w, f))
    return out


def rational_canonical_form(h, p: int):
    """Invariant factors (ascending divisibility) and a similarity witness.

    Returns (factors, P) with factors[i] | factors[i+1] and P invertible such
    that inverse(P) @ h @ P is block-diagonal with the companion matrices of
    the factors, in order.  Singular input is rejected (the classification
    pipeline only ever needs nonsingular endomorphisms).
    """
    h = modp(h, p)
    n = h.shape[0]
    if h.shape != (n, n):
        raise ValueError("matrix must be square")
    if n and not is_invertible(h, p):
        raise ValueError("matrix is singular")
    gens = _cyclic_generators(h, p)
    for (_, f1), (_, f2) in zip(gens, gens[1:]):
        assert not pmod(f1, f2, p), "divisibility chain broken"
    gens = gens[::-1]
    rows = []
    for v, f in gens:
        rows.extend(krylov_rows(h, v, pdeg(f), p))
    P = np.array(rows, dtype=np.int64).T if rows else zeros(n, n)
    if n:
        assert is_invertible(P, p)
    return [f for _, f in gens], P


def elementary_divisors(h, p: int) -> list[tuple]:
    """Sorted multiset of prime-power divisors q^e of the module of h."""
    factors, _ = rational_canonical_form(h, p)
    out = []
    for f in factors:
        for q, e in pfactor(f, p).items():
            out.append(ppow(q, e, p))
    return sorted(out)
