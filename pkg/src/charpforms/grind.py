"""The grinding pipeline for first-type classification objects.

The starting datum is a pair of antisymmetric forms (b nondegenerate, c
arbitrary) on two spaces carrying height flags matched by identity
identifications.  Grinding alternates two refinement steps: split every cell
into its flag factors, transferring the partner's flag through the pairing
(the orthogonal step) or through the matched isomorphisms (the iso step),
until every flag is trivial.  The primitive limit is a symplectic quiver
representation: nodes with nondegenerate pairings b, an involution tau, a
partial successor map sigma, and isomorphisms h solving
b_{sigma P}(h u, v) = c_{rho P}(nu u, nu v).  Its decomposition into
indecomposables (chains, hyperbolic chains, split and self-paired cycles,
the latter through an isotropic-invariant splitting) yields the descriptor:
a multiset of labelled pieces, with a prime-power endomorphism invariant on
the cycles.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import gfp
from .gfp import (INF, FlagChain, companion, empty_space, eye, make_flag,
                  modp, only_inf_flag, pairing_nondegenerate, pdeg, pfactor,
                  pmul, ppow, row_space, transfer_flag_via_iso,
                  transfer_flag_via_pairing, zeros)


def _label_key(q):
    return (1, 0) if q == INF else (0, q)


@dataclass
class VCell:
    dim: int
    alpha: int | None        # None only on the starting object (assigned at
                             # the first split as factor label + 1)
    flag: FlagChain
    partner: int


@dataclass
class WCell:
    dim: int
    flag: FlagChain
    partner: int | None      # None = infinity-tagged (no c through here)


@dataclass
class AState:
    p: int
    parity: int              # 0: flags increasing, 1: decreasing
    v: dict
    w: dict
    b: dict                  # vid -> pairing matrix V_x times V_{partner}
    c: dict                  # wid -> pairing matrix (absent for tagged cells)
    nu: dict                 # (vid, label) -> (wid, label, matrix)

    def check(self):
        for vid, cell in self.v.items():
            pb = self.b[vid]
            assert pb.shape == (cell.dim, self.v[cell.partner].dim)
            assert np.array_equal(self.b[cell.partner], modp(-pb.T, self.p))
            assert pairing_nondegenerate(pb, self.p) or cell.dim == 0
            if cell.partner == vid:
                assert not np.any(np.diagonal(pb))
        targets = {}
        for (vid, q), (wid, r, N) in self.nu.items():
            src = self.v[vid].flag.factor(q)
            dst = self.w[wid].flag.factor(r)
            assert N.shape == (dst.dim, src.dim) and gfp.is_invertible(N, self.p)
            assert (wid, r) not in targets
            targets[(wid, r)] = (vid, q)
        for wid, cell in self.w.items():
            for r in cell.flag.factor_labels():
                assert (wid, r) in targets, "nu misses a w-side factor"
            if cell.partner is not None:
                pc = self.c[wid]
                assert pc.shape == (cell.dim, self.w[cell.partner].dim)
                assert np.array_equal(self.c[cell.partner], modp(-pc.T, self.p))
                assert pairing_nondegenerate(pc, self.p)

    def is_primitive(self) -> bool:
        return all(c.flag.is_trivial() for c in self.v.values()) and \
            all(c.flag.is_trivial() for c in self.w.values())

    def total_dims(self):
        return (sum(c.dim for c in self.v.values()),
                sum(c.dim for c in self.w.values()))


@dataclass
class RCell:
    dim: int
    alpha: int
    flag: FlagChain          # the transferred K-flag
    parent: int
    label: object
    lift: np.ndarray         # factor section rows in parent-cell coordinates


@dataclass
class SCell:
    dim: int
    flag: FlagChain
    parent: int
    label: object
    lift: np.ndarray
    tagged: bool


@dataclass
class BState:
    p: int
    parity: int
    r: dict
    s: dict
    mu: dict                 # rid -> (sid, matrix)
    a_state: AState


def build_type1_object(p: int, heights, b, c) -> AState:
    """Package heights and the two bivector matrices as the starting object.

    b must be nondegenerate antisymmetric (the constant part of the form),
    c antisymmetric (the top-cohomology part); flags are the height flags on
    both sides, matched level-by-level by identity maps.
    """
    heights = tuple(int(m) for m in heights)
    n = len(heights)
    b = modp(b, p)
    c = modp(c, p)
    if not pairing_nondegenerate(modp(b, p), p):
        raise ValueError("constant part is degenerate")
    if np.any((b + b.T) % p) or np.any(np.diagonal(b) % p) or \
            np.any((c + c.T) % p) or np.any(np.diagonal(c) % p):
        raise ValueError("forms must be antisymmetric with zero diagonal")
    top = max(heights)
    spaces = []
    for q in range(top + 1):
        rows = [i for i in range(n) if heights[i] <= q]
        spaces.append(eye(n)[rows])
    flag = make_flag(n, "inc", spaces, p)
    st = AState(
        p=p, parity=0,
        v={0: VCell(n, None, flag, 0)},
        w={0: WCell(n, flag, 0)},
        b={0: b}, c={0: c}, nu={})
    for q in flag.factor_labels():
        fac = flag.factor(q)
        st.nu[(0, q)] = (0, q, eye(fac.dim))
    # the starting c may be degenerate; skip the full check here
    return st


def grind_A_to_B(A: AState) -> BState:
    """Split every cell by its flag; transfer the partner flags through the
    pairings (w side: the radical lands in the infinity slot)."""
    p = A.p
    r_cells: dict = {}
    s_cells: dict = {}
    rid_of: dict = {}
    sid_of: dict = {}
    for vid in sorted(A.v):
        cell = A.v[vid]
        for q in sorted(cell.flag.factor_labels(), key=_label_key):
            fac = cell.flag.factor(q)
            K = transfer_flag_via_pairing(A.b[vid], A.v[cell.partner].flag,
                                          cell.flag, q, p)
            alpha = cell.alpha if cell.alpha is not None else q + 1
            rid = len(r_cells)
            r_cells[rid] = RCell(fac.dim, alpha, K, vid, q, fac.lift())
            rid_of[(vid, q)] = rid
    new_dir = "dec" if A.parity == 0 else "inc"
    for wid in sorted(A.w):
        cell = A.w[wid]
        for r in sorted(cell.flag.factor_labels(), key=_label_key):
            fac = cell.flag.factor(r)
            if cell.partner is None:
                L = only_inf_flag(fac.dim, new_dir, p)
                tagged = True
            else:
                L = transfer_flag_via_pairing(A.c[wid], A.w[cell.partner].flag,
                                              cell.flag, r, p)
                tagged = False
            sid = len(s_cells)
            s_cells[sid] = SCell(fac.dim, L, wid, r, fac.lift(), tagged)
            sid_of[(wid, r)] = sid
    mu = {}
    for (vid, q), (wid, r, N) in A.nu.items():
        mu[rid_of[(vid, q)]] = (sid_of[(wid, r)], N)
    assert len(mu) == len(r_cells) == len(s_cells), "nu is not cell-bijective"
    return BState(p, A.parity, r_cells, s_cells, mu, A)


def _transfer_source_label(direction: str, t):
    """The partner-flag label whose orthogonal generates the factor's sup."""
    if direction == "dec":
        return t if t != INF else INF
    return (t + 1) if t != INF else gfp.INF1


def _corrected_pair_lift(A: AState, pairing, partner_flag: FlagChain,
                         cell_flag_factor, K: FlagChain, t, lift, p):
    """Representatives of a transferred-flag factor inside the honest
    intersection orth(partner space) ∩ window, as rows in the parent cell.

    The naive two-level lift lives in that intersection plus the window's
    sub; the sub part is stripped so induced pairings are read on legitimate
    representatives.
    """
    naive = modp(K.factor(t).lift() @ lift, p)
    src = _transfer_source_label(K.direction, t)
    O = gfp.orthogonal_subspace(pairing, partner_flag.space(src), p, side="right")
    S = gfp.subspace_intersection(O, cell_flag_factor.sup, p)
    stack = np.concatenate([S, cell_flag_factor.sub], axis=0)
    out = []
    for row in naive:
        coeffs = gfp.solve_rows(stack, row, p)
        assert coeffs is not None, "factor representative escaped orth + sub"
        out.append(modp(coeffs[: S.shape[0]] @ S, p))
    return np.array(out, dtype=np.int64).reshape(naive.shape)


def grind_B_to_A(B: BState) -> AState:
    """Split by the transferred flags; move flags through the isomorphisms,
    induce the new pairings from the parents, and wire the new nu maps."""
    p = B.p
    A = B.a_state
    vid_of: dict = {}
    wid_of: dict = {}
    v_cells: dict = {}
    w_cells: dict = {}
    b_new: dict = {}
    c_new: dict = {}
    nu_new: dict = {}
    # v side: factors of the K flags
    for rid in sorted(B.r):
        rc = B.r[rid]
        sid, N = B.mu[rid]
        sc = B.s[sid]
        for t in sorted(rc.flag.factor_labels(), key=_label_key):
            G = transfer_flag_via_iso(N, sc.flag, rc.flag, t, p, mode="preimage")
            vid = len(v_cells)
            v_cells[vid] = VCell(rc.flag.factor(t).dim, rc.alpha, G, -1)
            vid_of[(rid, t)] = vid
    # w side: factors of the L flags
    for sid in sorted(B.s):
        sc = B.s[sid]
        rid2 = next(r for r, (s2, _) in B.mu.items() if s2 == sid)
        N2 = B.mu[rid2][1]
        for t in sorted(sc.flag.factor_labels(), key=_label_key):
            H = transfer_flag_via_iso(N2, B.r[rid2].flag, sc.flag, t, p,
                                      mode="image")
            wid = len(w_cells)
            w_cells[wid] = WCell(sc.flag.factor(t).dim, H, None)
            wid_of[(sid, t)] = wid
    # partners and pairings on the v side: factor t of (X, q) pairs with
    # factor q of (Xbar, t), through the parent pairing b_X
    for (rid, t), vid in vid_of.items():
        rc = B.r[rid]
        X, q = rc.parent, rc.label
        Xbar = A.v[X].partner
        rid2 = next(r for r, c2 in B.r.items()
                    if c2.parent == Xbar and c2.label == t)
        vid2 = vid_of.get((rid2, q))
        assert vid2 is not None, "b-partner factor missing"
        v_cells[vid].partner = vid2
        rc2 = B.r[rid2]
        L1 = _corrected_pair_lift(A, A.b[X], A.v[Xbar].flag,
                                  A.v[X].flag.factor(q), rc.flag, t, rc.lift, p)
        L2 = _corrected_pair_lift(A, A.b[Xbar], A.v[X].flag,
                                  A.v[Xbar].flag.factor(t), rc2.flag, q,
                                  rc2.lift, p)
        pb = modp(L1 @ A.b[X] @ L2.T, p)
        b_new[vid] = pb
        assert pairing_nondegenerate(pb, p), "new b-pairing degenerate"
    # partners and pairings on the w side; missing partner cells mean the
    # factor came from a radical slot and the new cell is tagged
    for (sid, t), wid in wid_of.items():
        sc = B.s[sid]
        Z, r = sc.parent, sc.label
        if sc.tagged:
            continue
        Zbar = A.w[Z].partner
        sid2 = next((s2 for s2, c2 in B.s.items()
                     if c2.parent == Zbar and c2.label == t), None)
        if sid2 is None:
            # only the forced radical slot of a degenerate starting c can
            # lack its partner cell; it lives at the infinity label
            assert t == INF, "missing partner cell for a finite factor"
            continue  # stays tagged
        wid2 = wid_of.get((sid2, r))
        assert wid2 is not None, "partner cell lacks the matching factor"
        sc2 = B.s[sid2]
        L1 = _corrected_pair_lift(A, A.c[Z], A.w[Zbar].flag,
                                  A.w[Z].flag.factor(r), sc.flag, t, sc.lift, p)
        L2 = _corrected_pair_lift(A, A.c[Zbar], A.w[Z].flag,
                                  A.w[Zbar].flag.factor(t), sc2.flag, r,
                                  sc2.lift, p)
        pc = modp(L1 @ A.c[Z] @ L2.T, p)
        w_cells[wid].partner = wid2
        c_new[wid] = pc
        assert pairing_nondegenerate(pc, p), "new c-pairing degenerate"
    # nu: factor l of v-cell (rid, t) -> factor t of w-cell (mu(rid), l)
    for (rid, t), vid in vid_of.items():
        sid, N = B.mu[rid]
        for l in v_cells[vid].flag.factor_labels():
            M = gfp.induced_iso(N, B.r[rid].flag, B.s[sid].flag, t, l, p)
            nu_new[(vid, l)] = (wid_of[(sid, l)], t, M)
    out = AState(p, 1 - B.parity, v_cells, w_cells, b_new, c_new, nu_new)
    out.check()
    return out


def grind_round(A: AState) -> AState:
    return grind_B_to_A(grind_A_to_B(A))


def grind_to_primitive(A: AState) -> AState:
    """Alternate the two steps until every flag is trivial."""
    total = sum(A.total_dims())
    state = grind_round(A)  # the first round also normalizes the c-radical
    rounds = 1
    while not state.is_primitive():
        state = grind_round(state)
        rounds += 1
        assert rounds <= total + 2, "grinding did not terminate"
    assert state.total_dims() == A.total_dims(), "grinding lost dimensions"
    return state


# ---------------------------------------------------------------------------
# Quiver representation extraction.
# ---------------------------------------------------------------------------

@dataclass
class QuiverRep:
    p: int
    nodes: list
    dim: dict
    alpha: dict
    tau: dict
    b: dict                  # node -> pairing V_P x V_{tau P}
    sigma: dict              # node -> node or None
    h: dict                  # node -> matrix V_P -> V_{sigma P}


def extract_quiver_rep(A: AState) -> QuiverRep:
    """Read the symplectic quiver representation off a primitive state."""
    assert A.is_primitive(), "state is not primitive"
    A.check()
    p = A.p
    nodes = sorted(vid for vid in A.v if A.v[vid].dim > 0)
    single = {}
    for vid in nodes:
        labels = A.v[vid].flag.factor_labels()
        assert len(labels) == 1
        single[vid] = labels[0]
    nu_target = {}
    nu_mat = {}
    for (vid, q), (wid, r, N) in A.nu.items():
        if A.v[vid].dim > 0:
            assert q == single[vid]
            nu_target[vid] = wid
            nu_mat[vid] = N
    nu_inv = {wid: vid for vid, wid in nu_target.items()}
    assert len(nu_inv) == len(nodes), "nu is not a bijection on cells"
    tau = {vid: A.v[vid].partner for vid in nodes}
    sigma = {}
    h = {}
    for P in nodes:
        Z = nu_target[P]
        if A.w[Z].partner is None:
            sigma[P] = None
            continue
        Zbar = A.w[Z].partner
        tsP = nu_inv[Zbar]            # tau sigma P
        sigma[P] = tau[tsP]
        Bs = A.b[sigma[P]]            # V_{sigma P} x V_{tau sigma P}
        C = A.c[Z]                    # W_{rho P} x W_{rho tau sigma P}
        NP = nu_mat[P]
        Nts = nu_mat[tsP]
        h[P] = modp(gfp.inverse(Bs, p).T @ Nts.T @ C.T @ NP, p)
        # the defining identity: b_{sigma P}(h u, v) = c_{rho P}(nu u, nu v)
        assert np.array_equal(modp(h[P].T @ Bs, p), modp(NP.T @ C @ Nts, p))
    rep = QuiverRep(p, nodes,
                    {P: A.v[P].dim for P in nodes},
                    {P: A.v[P].alpha for P in nodes},
                    tau, {P: A.b[P] for P in nodes}, sigma, h)
    check_rep_axioms(rep)
    return rep


def check_rep_axioms(rep: QuiverRep) -> None:
    """The literal pairing axioms of a symplectic representation."""
    p = rep.p
    for P in rep.nodes:
        BP = rep.b[P]
        assert np.array_equal(rep.b[rep.tau[P]], modp(-BP.T, p))
        if rep.tau[P] == P:
            assert not np.any(np.diagonal(BP))
        sP = rep.sigma[P]
        if sP is None:
            continue
        tsP = rep.tau[sP]
        # sigma(tau sigma P) = tau P must be defined, with the adjoint law
        assert rep.sigma.get(tsP) == rep.tau[P], "sigma/tau structure broken"
        lhs = modp(rep.b[P] @ rep.h[tsP], p)
        rhs = modp(rep.h[P].T @ rep.b[sP], p)
        assert np.array_equal(lhs, rhs), "adjoint axiom failed"
        if sP == rep.tau[P]:
            M = modp(rep.b[P] @ rep.h[P], p)
            assert not np.any((M + M.T) % p) and not np.any(np.diagonal(M)), \
                "self-cycle form is not alternating"


# ---------------------------------------------------------------------------
# Indecomposables and the descriptor.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Indecomposable:
    periodic: bool
    top: tuple
    bottom: tuple
    endo: tuple | None       # prime-power polynomial for cycles, else None
    kind: str = field(compare=False, default="")

    def weight(self) -> int:
        return sum(self.top) + sum(self.bottom)


def canonical_pair_label(periodic: bool, top, bottom):
    """Lexicographic least representative of the label class.

    Finite pairs: min over identity and the reverse-swap.  Periodic pairs:
    reduce to the least period, then min over simultaneous rotations of the
    pair and of its reverse-swap.
    """
    top = tuple(int(x) for x in top)
    bottom = tuple(int(x) for x in bottom)
    if len(top) != len(bottom) or not top:
        raise ValueError("label sequences must have equal positive length")
    if not periodic:
        return min((top, bottom), (bottom[::-1], top[::-1]))
    t = len(top)
    for d in range(1, t + 1):
        if t % d == 0 and all(top[i] == top[i % d] for i in range(t)) \
                and all(bottom[i] == bottom[i % d] for i in range(t)):
            top, bottom, t = top[:d], bottom[:d], d
            break
    cands = []
    swapped = (bottom[::-1], top[::-1])
    for rot in range(t):
        cands.append((top[rot:] + top[:rot], bottom[rot:] + bottom[:rot]))
        cands.append((swapped[0][rot:] + swapped[0][:rot],
                      swapped[1][rot:] + swapped[1][:rot]))
    return min(cands)


def isotropic_invariant_split(M, h, p):
    """Split (V, M, h) into complementary isotropic h-invariant halves.

    M is a nondegenerate alternating form with M(u, hu) = 0 for all u, and h
    is invertible and self-adjoint for M.  Returns (U, U') as row bases.
    Follows the greedy construction: a maximal primary cyclic subspace, a
    partner pairing nontrivially against its minimal invariant subspace, and
    recursion on the orthogonal complement.
    """
    d = M.shape[0]
    if d == 0:
        return empty_space(0), empty_space(0)
    Mh = modp(M @ h, p)
    assert not np.any((Mh + Mh.T) % p) and not np.any(np.diagonal(Mh)), \
        "form is not h-alternating"
    mu = gfp.min_poly(h, p)
    fac = pfactor(mu, p)
    q, e = max(fac.items(), key=lambda qe: (pdeg(qe[0]) * qe[1], qe[0]))
    qe = ppow(q, e, p)
    cof = gfp.pdivmod(mu, qe, p)[0]
    v = gfp.max_vector(h, p)
    gen = modp(gfp.peval_matrix(cof, h, p) @ v, p)
    dim1 = pdeg(qe)
    U1 = gfp.krylov_rows(h, gen, dim1, p)
    # minimal invariant subspace of the primary cyclic U1
    mingen = modp(gfp.peval_matrix(ppow(q, e - 1, p), h, p) @ gen, p)
    Umin = gfp.krylov_rows(h, mingen, pdeg(q), p)
    # partner generator: pairs nontrivially with Umin, q-primary component
    pair_vals = modp(Umin @ M, p)
    w = None
    for i in range(d):
        if np.any(pair_vals[:, i]):
            w = np.zeros(d, dtype=np.int64)
            w[i] = 1
            break
    assert w is not None, "no partner found (form degenerate?)"
    # CRT idempotent: 1 mod q^e, 0 mod the cofactor of mu
    _, s1, t1 = gfp.pxgcd(qe, cof, p)
    pi = gfp.pmod(pmul(t1, cof, p), mu, p)
    wq = modp(gfp.peval_matrix(pi, h, p) @ w, p)
    assert np.any(modp(Umin @ M @ wq, p)), "primary projection lost the pairing"
    loc = gfp.local_min_poly(h, wq, p)
    U1p = gfp.krylov_rows(h, wq, pdeg(loc), p)
    both = np.concatenate([U1, U1p])
    Mres = modp(both @ M @ both.T, p)
    assert gfp.rank(Mres, p) == both.shape[0], "U1 + U1' is degenerate"
    # recurse on the orthogonal complement
    W = gfp.orthogonal_subspace(M, row_space(both, p), p)
    MW = modp(W @ M @ W.T, p)
    hW = _restrict(h, W, p)
    UW, UWp = isotropic_invariant_split(MW, hW, p)
    U = row_space(np.concatenate([U1, modp(UW @ W, p)]), p)
    Up = row_space(np.concatenate([U1p, modp(UWp @ W, p)]), p)
    _assert_split(M, h, U, Up, p)
    return U, Up


def _restrict(h, rows, p):
    """h in the coordinates of an invariant row space."""
    if rows.shape[0] == 0:
        return zeros(0, 0)
    imgs = modp(rows @ h.T, p)
    coords = [gfp.solve_rows(rows, im, p) for im in imgs]
    assert all(c is not None for c in coords), "space is not h-invariant"
    return np.array(coords, dtype=np.int64).T


def _assert_split(M, h, U, Up, p):
    d = M.shape[0]
    assert U.shape[0] + Up.shape[0] == d
    assert gfp.subspace_intersection(U, Up, p).shape[0] == 0
    for S in (U, Up):
        assert not np.any(modp(S @ M @ S.T, p)), "half is not isotropic"
        _restrict(h, S, p)  # raises if not invariant


def _walk_sigma(rep: QuiverRep, start):
    out = [start]
    seen = {start}
    cur = start
    while rep.sigma[cur] is not None and rep.sigma[cur] not in seen:
        cur = rep.sigma[cur]
        out.append(cur)
        seen.add(cur)
    return out


def decompose_rep(rep: QuiverRep) -> Counter:
    """Split into tau-connected components and classify each."""
    p = rep.p
    adj = {P: set() for P in rep.nodes}
    for P in rep.nodes:
        adj[P].add(rep.tau[P])
        adj[rep.tau[P]].add(P)
        if rep.sigma[P] is not None:
            adj[P].add(rep.sigma[P])
            adj[rep.sigma[P]].add(P)
    seen = set()
    out: Counter = Counter()
    for P0 in rep.nodes:
        if P0 in seen:
            continue
        comp = set()
        stack = [P0]
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(adj[x] - comp)
        seen |= comp
        out.update(_classify_component(rep, comp))
    return out


def _classify_component(rep: QuiverRep, comp) -> Counter:
    p = rep.p
    incoming = {P for P in comp if rep.sigma.get(P) in comp and rep.sigma[P] is not None}
    has_in = {rep.sigma[P] for P in incoming}
    starts = sorted(P for P in comp if P not in has_in)
    out: Counter = Counter()
    if starts:
        P1 = starts[0]
        walk = _walk_sigma(rep, P1)
        tau_walk = [rep.tau[P] for P in walk]
        assert set(walk) | set(tau_walk) == comp, "chain walk missed nodes"
        top = tuple(rep.alpha[P] for P in walk)
        bottom = tuple(rep.alpha[P] for P in tau_walk)
        label = canonical_pair_label(False, top, bottom)
        dims = {rep.dim[P] for P in comp}
        assert len(dims) == 1, "chain dims are not constant"
        d = dims.pop()
        if rep.tau[P1] in walk:
            # self-paired: the walk covers the component and tau reflects it
            n = len(walk)
            assert all(rep.tau[walk[i]] == walk[n - 1 - i] for i in range(n))
            H = eye(d)
            for P in walk[:-1]:
                H = modp(rep.h[P] @ H, p)
            M = modp(rep.b[P1] @ H, p)
            assert not np.any((M + M.T) % p) and not np.any(np.diagonal(M))
            assert gfp.rank(M, p) == d and d % 2 == 0
            out[Indecomposable(False, *label, None, kind="chain-selfpaired")] += d // 2
        else:
            assert not (set(walk) & set(tau_walk))
            out[Indecomposable(False, *label, None, kind="chain-open")] += d
        return out
    # cycle case
    P1 = min(comp, key=lambda P: (rep.alpha[P], P))
    walk = _walk_sigma(rep, P1)
    assert rep.sigma[walk[-1]] == P1, "cycle did not close"
    top = tuple(rep.alpha[P] for P in walk)
    bottom = tuple(rep.alpha[rep.tau[P]] for P in walk)
    label = canonical_pair_label(True, top, bottom)
    H = eye(rep.dim[P1])
    for P in walk:
        H = modp(rep.h[P] @ H, p)
    if rep.tau[P1] in walk:
        s = walk.index(rep.tau[P1])
        Hs = eye(rep.dim[P1])
        for P in walk[:s]:
            Hs = modp(rep.h[P] @ Hs, p)
        M = modp(rep.b[P1] @ Hs, p)
        U, _ = isotropic_invariant_split(M, H, p)
        endo_mat = _restrict(H, U, p)
        kind = "cycle-selfpaired"
    else:
        assert not (set(walk) & {rep.tau[P] for P in walk})
        endo_mat = H
        kind = "cycle-split"
    for qe in gfp.elementary_divisors(endo_mat, p):
        assert qe[0] != 0, "cycle endomorphism is singular"
        out[Indecomposable(True, *label, tuple(qe), kind=kind)] += 1
    return out


def descriptor_equal(d1: Counter, d2: Counter) -> bool:
    return d1 == d2


# ---------------------------------------------------------------------------
# Normal-shape matrices.
# ---------------------------------------------------------------------------

def synthesize_normal_matrices(ind: Indecomposable, p: int):
    """(heights, a, c) realizing one indecomposable over F_p.

    Finite label (k, l) of length n: 2n variables with heights k + l,
    a = [[0, E], [-E, 0]], c = the nilpotent Jordan block pattern.  Periodic
    label of period t with a prime-power endomorphism of degree n: 2tn
    variables in 2t groups, identity blocks up the superdiagonal and the
    companion matrix closing the cycle.
    """
    top, bottom = ind.top, ind.bottom
    if not ind.periodic:
        n = len(top)
        heights = tuple(top + bottom)
        a = zeros(2 * n, 2 * n)
        c = zeros(2 * n, 2 * n)
        for i in range(n):
            a[i, n + i] = 1
            a[n + i, i] = p - 1
        for i in range(n - 1):
            c[i, n + i + 1] = 1
            c[n + i + 1, i] = p - 1
        return heights, modp(a, p), modp(c, p)
    t = len(top)
    assert ind.endo is not None
    n = pdeg(ind.endo)
    Xi = companion(ind.endo, p)
    heights = tuple(sum(([k] * n for k in top), [])) + \
        tuple(sum(([l] * n for l in bottom), []))
    N = 2 * t * n
    a = zeros(N, N)
    c = zeros(N, N)
    for i in range(t * n):
        a[i, t * n + i] = 1
        a[t * n + i, i] = p - 1
    for g in range(t - 1):
        for i in range(n):
            c[g * n + i, t * n + (g + 1) * n + i] = 1
            c[t * n + (g + 1) * n + i, g * n + i] = p - 1
    for i in range(n):
        for j in range(n):
            val = int(Xi[j, i]) % p
            c[(t - 1) * n + i, t * n + j] = val
            c[t * n + j, (t - 1) * n + i] = (-val) % p
    return heights, modp(a, p), modp(c, p)


def synthesize_descriptor_matrices(desc: Counter, p: int):
    """Block-diagonal assembly over the descriptor multiset."""
    entries = []
    for ind in sorted(desc, key=_ind_sort_key):
        for _ in range(desc[ind]):
            entries.append(synthesize_normal_matrices(ind, p))
    heights: list = []
    blocks_a = []
    blocks_c = []
    for h, a, c in entries:
        heights.extend(h)
        blocks_a.append(a)
        blocks_c.append(c)
    N = len(heights)
    A = zeros(N, N)
    C = zeros(N, N)
    at = 0
    for a, c in zip(blocks_a, blocks_c):
        d = a.shape[0]
        A[at:at + d, at:at + d] = a
        C[at:at + d, at:at + d] = c
        at += d
    return tuple(heights), modp(A, p), modp(C, p)


def _ind_sort_key(ind: Indecomposable):
    return (ind.periodic, len(ind.top), ind.top, ind.bottom,
            ind.endo if ind.endo is not None else ())


def classify_type1_matrices(p: int, heights, b, c) -> Counter:
    """Full pipeline: object, grind, extract, decompose."""
    A = build_type1_object(p, heights, b, c)
    prim = grind_to_primitive(A)
    rep = extract_quiver_rep(prim)
    return decompose_rep(rep)


def descriptor_weight_catalog(p: int, max_weight: int = 4, max_entry: int = 2,
                              max_endo_deg: int = 2):
    """All indecomposables with label weight and endo degree in the bounds."""
    out = []
    labels_fin = set()
    labels_per = set()
    for n in (1, 2):
        for top in itertools.product(range(1, max_entry + 1), repeat=n):
            for bottom in itertools.product(range(1, max_entry + 1), repeat=n):
                if sum(top) + sum(bottom) > max_weight:
                    continue
                labels_fin.add(canonical_pair_label(False, top, bottom))
                labels_per.add(canonical_pair_label(True, top, bottom))
    for top, bottom in sorted(labels_fin):
        out.append(Indecomposable(False, top, bottom, None, kind="chain"))
    endos = []
    for d in range(1, max_endo_deg + 1):
        for q in gfp.irreducibles(p, d):
            for e in range(1, max_endo_deg // d + 1):
                qe = ppow(q, e, p)
                if pdeg(qe) <= max_endo_deg and qe[0] != 0:
                    endos.append(qe)
    for top, bottom in sorted(labels_per):
        # only least-period representatives
        if canonical_pair_label(True, top, bottom) != (top, bottom):
            continue
        for qe in endos:
            out.append(Indecomposable(True, top, bottom, tuple(qe), kind="cycle"))
    return out
