"""Recognition, invariants, normal shapes and equivalence of symplectic and
contact forms.

A symplectic candidate is a pair (u-class vector e, degree-2 body) standing
for exp(sum e_i x_i) * body: closedness reads d(body) + (sum e_i dx_i) ^ body
= 0, nondegeneracy is a unit determinant of the coefficient matrix (decided
on constant terms, which is exact in a local ring).  Type 1 (e = 0) is
classified by the grinding descriptor of the pair (constant bivector,
top-cohomology bivector); type 2 by the height level of e together with the
augmented flag invariants of the constant bivector; contact forms by the
augmented invariants of their constant linear and bivector parts.
"""
from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import gfp
from .algebra import AlgebraElement, FlagSpec
from .flagbilinear import (AugmentedInvariant, FlaggedBilinear,
                           admissible_grids, invariants_contact_pair,
                           invariants_form_functional)
from .forms import DiffForm, e_vector_form, h_class
from .grind import (classify_type1_matrices, descriptor_equal,
                    synthesize_descriptor_matrices)
from .groups import Automorphism, random_in, transport_witness


@dataclass
class SymplecticCandidate:
    u_class: np.ndarray
    body: DiffForm

    def __post_init__(self):
        self.u_class = np.asarray(self.u_class, dtype=np.int64) % self.spec.p
        if self.body.degree != 2:
            raise ValueError("body must be a 2-form")
        if len(self.u_class) != self.spec.n:
            raise ValueError("u-class length mismatch")

    @property
    def spec(self) -> FlagSpec:
        return self.body.spec

    def has_u(self) -> bool:
        return bool(np.any(self.u_class))


@dataclass
class ContactCandidate:
    form: DiffForm

    def __post_init__(self):
        if self.form.degree != 1:
            raise ValueError("contact candidate must be a 1-form")

    @property
    def spec(self) -> FlagSpec:
        return self.form.spec


@dataclass(frozen=True)
class Type2Invariant:
    k: int
    ell: int
    grid: tuple

    def as_augmented(self) -> AugmentedInvariant:
        return AugmentedInvariant(self.ell, self.grid)


@dataclass(frozen=True)
class ContactInvariant:
    k: int
    grid: tuple


def constant_bivector(body: DiffForm) -> np.ndarray:
    """The coefficient matrix of body mod m * Omega^2 (antisymmetric)."""
    spec = body.spec
    n = spec.n
    out = gfp.zeros(n, n)
    zero = spec.zero_mono()
    for (i, j), f in body.terms.items():
        c = f.terms.get(zero, 0)
        out[i, j] = c
        out[j, i] = (-c) % spec.p
    return out


def constant_covector(omega: DiffForm) -> np.ndarray:
    spec = omega.spec
    out = np.zeros(spec.n, dtype=np.int64)
    zero = spec.zero_mono()
    for (i,), f in omega.terms.items():
        out[i] = f.terms.get(zero, 0)
    return out


def h2_bivector(body: DiffForm) -> np.ndarray:
    """The class of a closed 2-form as an antisymmetric matrix over the
    top-cocycle basis."""
    spec = body.spec
    n = spec.n
    coords = h_class(body)
    out = gfp.zeros(n, n)
    for c, (i, j) in zip(coords, itertools.combinations(range(n), 2)):
        out[i, j] = c
        out[j, i] = (-int(c)) % spec.p
    return out


def is_symplectic(cand: SymplecticCandidate) -> str:
    """'no', 'type1' or 'type2'."""
    spec = cand.spec
    p = spec.p
    if p == 2 and cand.has_u() and any(m == 1 for m in spec.heights):
        raise ValueError("type-2 recognition at p = 2 needs all heights > 1")
    closed = cand.body.d() + e_vector_form(spec, cand.u_class).wedge(cand.body)
    if closed:
        return "no"
    if gfp.det(constant_bivector(cand.body), p) == 0:
        return "no"
    return "type2" if cand.has_u() else "type1"


def height_flag_data(spec: FlagSpec):
    """The dual flag on V = E^* : V_q spanned by coordinates of height <= q."""
    r = max(spec.heights)
    n = spec.n
    flag = [gfp.empty_space(n)]
    for q in range(1, r + 1):
        rows = [i for i in range(n) if spec.heights[i] <= q]
        flag.append(gfp.row_space(gfp.eye(n)[rows], spec.p)
                    if rows else gfp.empty_space(n))
    return tuple(flag)


def invariants(cand) -> Type2Invariant | ContactInvariant | Counter:
    """Complete conjugacy invariants of a recognized form."""
    if isinstance(cand, SymplecticCandidate):
        kind = is_symplectic(cand)
        if kind == "no":
            raise ValueError("not a symplectic form")
        spec = cand.spec
        b = constant_bivector(cand.body)
        if kind == "type1":
            c = h2_bivector(cand.body)
            return classify_type1_matrices(spec.p, spec.heights, b, c)
        return _type2_invariants(spec, cand.u_class, b)
    if isinstance(cand, ContactCandidate):
        if not is_contact(cand):
            raise ValueError("not a contact form")
        return _contact_invariants(cand)
    raise TypeError("unrecognized candidate type")


def _type2_invariants(spec: FlagSpec, e, b) -> Type2Invariant:
    p = spec.p
    k = min(spec.heights[i] for i in range(spec.n) if int(e[i]) % p)
    flag = height_flag_data(spec)
    fb = FlaggedBilinear(p, flag, b)
    fac = gfp.make_factor(flag[k - 1], flag[k], p)
    # the functional on V_k/V_{k-1} induced by e (the section basis is made
    # of coordinate vectors, so evaluation is coordinate pairing)
    f = gfp.modp(fac.lift() @ np.asarray(e, dtype=np.int64), p)
    aug = invariants_form_functional(fb, k, f)
    return Type2Invariant(k, aug.special, aug.grid)


def _contact_invariants(cand: ContactCandidate) -> ContactInvariant:
    spec = cand.spec
    p = spec.p
    x = constant_covector(cand.form)
    b = constant_bivector(cand.form.d())
    flag = height_flag_data(spec)
    aug = invariants_contact_pair(p, flag, x, b)
    return ContactInvariant(aug.special, aug.grid)


# ---------------------------------------------------------------------------
# Contact recognition.
# ---------------------------------------------------------------------------

def is_contact(cand: ContactCandidate) -> bool:
    """Unit bordered determinant; decided on constant terms (exact)."""
    spec = cand.spec
    if spec.p == 2:
        raise ValueError("contact recognition requires p > 2")
    n = spec.n
    x = constant_covector(cand.form)
    db = constant_bivector(cand.form.d())
    M = gfp.zeros(n + 1, n + 1)
    M[:n, :n] = db
    M[:n, n] = x
    M[n, :n] = (-x) % spec.p
    return gfp.det(M, spec.p) != 0


def contact_split(cand: ContactCandidate):
    """F_p-bases of P = ker(delta -> delta . d omega) and
    Q = ker(delta -> omega(delta)) inside W(F)."""
    spec = cand.spec
    if not is_contact(cand):
        raise ValueError("not a contact form")
    p = spec.p
    monos = list(spec.monomials())
    mono_index = {m: i for i, m in enumerate(monos)}
    dimO = len(monos)
    dimW = spec.n * dimO
    domega = cand.form.d()

    def delta_of(col):
        i, m = divmod(col, dimO)
        coeffs = [AlgebraElement.zero(spec) for _ in range(spec.n)]
        coeffs[i] = AlgebraElement(spec, {monos[m]: 1})
        return coeffs

    rows_P = gfp.zeros(dimW, dimW)   # delta -> delta . d omega (1-form coords)
    rows_Q = gfp.zeros(dimO, dimW)   # delta -> omega(delta)
    for col in range(dimW):
        delta = delta_of(col)
        contr = domega.contract(delta)
        for (i,), f in contr.terms.items():
            for m, c in f.terms.items():
                rows_P[i * dimO + mono_index[m], col] = c
        val = AlgebraElement.zero(spec)
        for (i,), f in cand.form.terms.items():
            val = val + f * delta[i]
        for m, c in val.terms.items():
            rows_Q[mono_index[m], col] = c
    P = gfp.nullspace(rows_P, p)
    Q = gfp.nullspace(rows_Q, p)
    assert P.shape[0] + Q.shape[0] == dimW, "contact split dimensions broken"
    return P, Q


# ---------------------------------------------------------------------------
# Normal shapes.
# ---------------------------------------------------------------------------

def heights_from_grid(grid, contact_k: int | None = None) -> tuple:
    """Heights realizing a full-row-sum grid; for contact grids the k-row
    carries one extra variable (the distinguished index)."""
    grid = np.asarray(grid, dtype=np.int64)
    r = grid.shape[0]
    dims = [int(grid[q].sum()) for q in range(r)]
    if contact_k is not None:
        dims[contact_k - 1] += 1
    heights = []
    for q in range(r):
        heights.extend([q + 1] * dims[q])
    return tuple(heights)


def _pairing_partition(spec: FlagSpec, grid, exclude: int | None = None):
    """Split indices into the I_qt sets and pair them; returns the involution
    as a dict.  Variables of height q fill I_q1, I_q2, ... in index order."""
    grid = np.asarray(grid, dtype=np.int64)
    r = grid.shape[0]
    pool = {q: [i for i in range(spec.n)
                if spec.heights[i] == q + 1 and i != exclude]
            for q in range(r)}
    sets: dict = {}
    for q in range(r):
        at = 0
        for t in range(r):
            cnt = int(grid[q, t])
            sets[(q, t)] = pool[q][at:at + cnt]
            at += cnt
        assert at == len(pool[q]), "grid does not match the height counts"
    pairing: dict = {}
    for q in range(r):
        for t in range(q, r):
            if q == t:
                mem = sets[(q, q)]
                for a in range(0, len(mem), 2):
                    pairing[mem[a]] = mem[a + 1]
                    pairing[mem[a + 1]] = mem[a]
            else:
                for a, bdx in zip(sets[(q, t)], sets[(t, q)]):
                    pairing[a] = bdx
                    pairing[bdx] = a
    return sets, pairing


def normal_shape(inv, p: int):
    """The canonical representative of an invariant datum.

    Type 2: d(exp(x_{i0}) * sum x_i dx_{i'}) encoded as a candidate; contact:
    dx_{i0} + sum x_i dx_{i'}; type 1: the descriptor's block matrices as
    sum (a_ij + b_ij x_i^(top) x_j^(top)) dx_i ^ dx_j.
    """
    if isinstance(inv, Counter):
        heights, a, c = synthesize_descriptor_matrices(inv, p)
        spec = FlagSpec(p, heights)
        terms: dict = {}
        for i in range(spec.n):
            for j in range(i + 1, spec.n):
                coeff = AlgebraElement.zero(spec)
                if a[i, j]:
                    coeff = coeff + AlgebraElement.scalar(spec, int(a[i, j]))
                if c[i, j]:
                    mono = tuple(spec.caps[l] - 1 if l in (i, j) else 0
                                 for l in range(spec.n))
                    coeff = coeff + AlgebraElement(spec, {mono: int(c[i, j])})
                if coeff:
                    terms[(i, j)] = coeff
        body = DiffForm(spec, 2, terms)
        return SymplecticCandidate(np.zeros(spec.n, dtype=np.int64), body)
    if isinstance(inv, Type2Invariant):
        grid = np.asarray(inv.grid, dtype=np.int64)
        if grid[inv.k - 1, inv.ell - 1] == 0:
            raise ValueError("inadmissible type-2 invariants: n_kl = 0")
        heights = heights_from_grid(grid)
        spec = FlagSpec(p, heights)
        sets, pairing = _pairing_partition(spec, grid)
        i0 = sets[(inv.k - 1, inv.ell - 1)][0]
        eta = DiffForm(spec, 1, {})
        for i in sorted(pairing):
            j = pairing[i]
            if i < j:
                eta = eta + DiffForm(spec, 1, {(j,): AlgebraElement.generator(spec, i)})
        e = np.zeros(spec.n, dtype=np.int64)
        e[i0] = 1
        body = eta.d() + e_vector_form(spec, e).wedge(eta)
        cand = SymplecticCandidate(e, body)
        assert is_symplectic(cand) == "type2"
        return cand
    if isinstance(inv, ContactInvariant):
        grid = np.asarray(inv.grid, dtype=np.int64)
        heights = heights_from_grid(grid, contact_k=inv.k)
        spec = FlagSpec(p, heights)
        i0 = next(i for i in range(spec.n) if spec.heights[i] == inv.k)
        sets, pairing = _pairing_partition(spec, grid, exclude=i0)
        terms = {(i0,): AlgebraElement.one(spec)}
        for i in sorted(pairing):
            j = pairing[i]
            if i < j:
                terms[(j,)] = terms.get((j,), AlgebraElement.zero(spec)) + \
                    AlgebraElement.generator(spec, i)
        cand = ContactCandidate(DiffForm(spec, 1, terms))
        assert is_contact(cand)
        return cand
    raise TypeError("unknown invariant datum")


# ---------------------------------------------------------------------------
# Equivalence.
# ---------------------------------------------------------------------------

def recognize(cand) -> str:
    if isinstance(cand, SymplecticCandidate):
        return is_symplectic(cand)
    if isinstance(cand, ContactCandidate):
        return "contact" if is_contact(cand) else "no"
    raise TypeError("unknown candidate")


def equivalent(c1, c2) -> tuple[bool, dict]:
    """Equivalence decision with a report naming the matched invariants."""
    s1, s2 = c1.spec, c2.spec
    if s1.p != s2.p:
        raise ValueError("mixed characteristics")
    k1, k2 = recognize(c1), recognize(c2)
    report = {"kind": (k1, k2)}
    if k1 == "no" or k2 == "no" or k1 != k2:
        report["reason"] = "kind mismatch"
        return False, report
    if s1.heights_multiset() != s2.heights_multiset():
        report["reason"] = "height multisets differ"
        return False, report
    i1, i2 = invariants(c1), invariants(c2)
    if isinstance(i1, Counter):
        same = descriptor_equal(i1, i2)
        report["descriptor_match"] = same
    else:
        same = i1 == i2
        report["invariants"] = (str(i1), str(i2))
    return same, report


def same_Gprime_orbit(c1: SymplecticCandidate, c2: SymplecticCandidate) -> bool:
    """Type-1 forms over the same spec: equal constant bivectors and equal
    top-cohomology classes (p > 2)."""
    s = c1.spec
    if s.p == 2:
        raise ValueError("the G'-orbit predicate requires p > 2")
    if c2.spec != s:
        raise ValueError("specs differ")
    if is_symplectic(c1) != "type1" or is_symplectic(c2) != "type1":
        raise ValueError("both forms must be first-type symplectic")
    return np.array_equal(constant_bivector(c1.body), constant_bivector(c2.body)) \
        and np.array_equal(h2_bivector(c1.body), h2_bivector(c2.body))


# ---------------------------------------------------------------------------
# Group action on candidates and random generation.
# ---------------------------------------------------------------------------

def apply_to_candidate(sigma: Automorphism, cand):
    """Transport a candidate along an automorphism.

    Symplectic: sigma(exp(e) body) = exp(e') * (lam * w * sigma(body)) with
    (e', w, lam) from the u-class transport; contact: plain form action.
    """
    if isinstance(cand, ContactCandidate):
        return ContactCandidate(sigma.apply_to_form(cand.form))
    spec = cand.spec
    if not cand.has_u():
        return SymplecticCandidate(cand.u_class,
                                   sigma.apply_to_form(cand.body))
    e2, w, lam = transport_witness(sigma, cand.u_class)
    body2 = sigma.apply_to_form(cand.body).mul_function(w.scale(lam))
    return SymplecticCandidate(e2, body2)


def admissible_type2_invariants(heights, p: int):
    """All (k, ell, grid) for the given heights (full row sums, n_kl != 0)."""
    heights = tuple(heights)
    r = max(heights)
    dims = [sum(1 for m in heights if m == q) for q in range(1, r + 1)]
    out = []
    for grid in admissible_grids(dims, nondegenerate=True):
        for k in range(1, r + 1):
            if not any(m == k for m in heights):
                continue
            for ell in range(1, r + 1):
                if grid[k - 1, ell - 1]:
                    out.append(Type2Invariant(
                        k, ell, tuple(tuple(int(x) for x in row) for row in grid)))
    return out


def admissible_contact_invariants(heights, p: int):
    """All (k, grid) for the given heights per the contact row-sum rule."""
    heights = tuple(heights)
    r = max(heights)
    dims = [sum(1 for m in heights if m == q) for q in range(1, r + 1)]
    out = []
    for k in range(1, r + 1):
        if dims[k - 1] == 0:
            continue
        qdims = list(dims)
        qdims[k - 1] -= 1
        for grid in admissible_grids(qdims, nondegenerate=True):
            out.append(ContactInvariant(
                k, tuple(tuple(int(x) for x in row) for row in grid)))
    return out


def random_form(kind: str, spec: FlagSpec, seed: int):
    """A recognized random form: a normal shape conjugated by a random group
    element (contact forms also pick up a random unit factor)."""
    rng = random.Random(seed)
    p = spec.p
    if kind == "type1":
        # random nondegenerate constant part and random top part over the
        # requested heights (n must be even for nondegeneracy)
        n = spec.n
        if n % 2:
            raise ValueError("type-1 forms need an even number of variables")
        while True:
            a = gfp.random_matrix(rng, n, n, p)
            a = gfp.modp(a - a.T, p)
            np.fill_diagonal(a, 0)
            if gfp.det(a, p):
                break
        cmat = gfp.random_matrix(rng, n, n, p)
        cmat = gfp.modp(cmat - cmat.T, p)
        np.fill_diagonal(cmat, 0)
        terms: dict = {}
        for i in range(n):
            for j in range(i + 1, n):
                coeff = AlgebraElement.zero(spec)
                if a[i, j]:
                    coeff = coeff + AlgebraElement.scalar(spec, int(a[i, j]))
                if cmat[i, j]:
                    mono = tuple(spec.caps[l] - 1 if l in (i, j) else 0
                                 for l in range(n))
                    coeff = coeff + AlgebraElement(spec, {mono: int(cmat[i, j])})
                if coeff:
                    terms[(i, j)] = coeff
        cand = SymplecticCandidate(np.zeros(n, dtype=np.int64),
                                   DiffForm(spec, 2, terms))
    elif kind == "type2":
        if p == 2 and any(m == 1 for m in spec.heights):
            raise ValueError("type-2 generation at p = 2 needs all heights > 1")
        invs = admissible_type2_invariants(spec.heights, p)
        if not invs:
            raise ValueError(f"no admissible type-2 invariants for {spec.heights}")
        cand = normal_shape(rng.choice(invs), p)
    elif kind == "contact":
        if p == 2:
            raise ValueError("no contact forms at p = 2")
        invs = admissible_contact_invariants(spec.heights, p)
        if not invs:
            raise ValueError(f"no admissible contact invariants for {spec.heights}")
        cand = normal_shape(rng.choice(invs), p)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    sigma = random_in(rng, cand.spec, "G")
    cand = apply_to_candidate(sigma, cand)
    if kind == "contact":
        from .algebra import random_element
        u = AlgebraElement.scalar(cand.spec, rng.randrange(1, p)) + \
            random_element(rng, cand.spec, 2)
        cand = ContactCandidate(cand.form.mul_function(u))
    return cand
