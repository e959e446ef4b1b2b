"""Embedders for dense hosts.

The structure behind the cluster-guided loop, the loop itself, the
average-degree boost, the two reduced-graph embedders and the top-level
dispatcher.  The asymptotic constants these arguments are written for are
out of reach at desk scale.  So every inequality is evaluated and logged;
lenient runs continue past failed checks.  Every success ends in
:func:`verify_embedding`.  When a stage starves, the exact search takes
over and ``notes['fallback']`` records it.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .concentration import WeightedFunction, concentration_dichotomy, low_set_weak
from .embedding import Embedding, backtracking_embed, greedy_embed_h, greedy_place, root_children_first, verify_embedding
from .errors import (BudgetExhausted, EmbeddingFailure, LoopStarvation, PathShortfall, PreconditionError,
                     RefinementError, StructureError)
from .exact import Surd, ceil_frac, frac, grow, root_floor, root_times, shrink
from .extremal import embed_almost_complete, embed_almost_complete_bipartite
from .graph import Bipartition, Graph, best_bipartition, bits, intra_edges, mask_of, peel_min_degree
from .matching import graph_max_matching
from .regularity import (RegularPartition, ReducedGraph, build_reduced, matching_structure, refine_partition,
                         regular_pair_tree_embed)
from .report import Config, StageLog, render
from .trees import RootedTree, canonical_form, components_without, cut_set, enumerate_trees, even_cut_set, \
    find_cut_subtree, leaves_or_bare_paths

# failures that hand over to the exact search in lenient runs
_SOFT = (EmbeddingFailure, StructureError, RefinementError, PathShortfall)


def _fresh(G: Graph) -> Graph:
    """Same graph with identity labels, so that derived graphs label into it."""
    return Graph.from_adjacency(list(G.adj), validate=False)


def _root4(eps) -> Surd:
    return root_times(1, eps, 4)


def _fallback(T: RootedTree, G: Graph, notes: dict, exc: Exception, budget: int, domains=None):
    notes["fallback"] = True
    notes["primary_failure"] = f"{type(exc).__name__}: {exc}"
    try:
        found = backtracking_embed(T, G, budget=budget, domains=domains)
    except BudgetExhausted:
        notes["fallback_result"] = "budget exhausted"
        return None
    notes["fallback_result"] = "found" if found is not None else "no copy"
    return found


def _finish(T, G, phi, route, notes, exc_stage):
    if phi is None:
        raise EmbeddingFailure(f"{route}: pipeline and exact search both failed ({notes.get('fallback_result')})",
                               exc_stage)
    emb = Embedding(dict(phi), route=route, notes=notes)
    verify_embedding(T, G, emb)
    return emb


# -- structure certificate ------------------------------------------------------------

@dataclass
class StructureCertificate:
    X: int
    M_W: list
    M_V: list
    A_part: list
    B_part: list
    matching: list
    independent: list
    cluster_size: int
    n: int
    k: int
    delta: Fraction
    properties: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return render({
            "X": self.X, "M_W": [list(e) for e in self.M_W], "M_V": [list(e) for e in self.M_V],
            "A_part": self.A_part, "B_part": self.B_part, "matching": [list(e) for e in self.matching],
            "independent": self.independent, "cluster_size": self.cluster_size, "n": self.n, "k": self.k,
            "delta": self.delta, "properties": self.properties,
        })


def structure_from_reduced(R: Graph, matching, independent, cluster_size: int, n: int, k: int, delta,
                           X: int | None = None) -> StructureCertificate:
    """X, M_W, M_V and (A, B) from a reduced graph with a matching M and an
    independent family I.

    M_W takes the M-edges inside N(X) first, then greedily pairs I-clusters
    of N(X) with uncovered M-clusters of N(X).  M_V is the rest of M with
    exactly one end in N(X) and no end already in M_W.
    """
    delta = frac(delta)
    if X is None:
        X = max(range(R.n), key=lambda c: (R.degree(c), -c))
    NX = set(R.neighbors(X))
    matching = sorted(tuple(sorted(e)) for e in matching)
    in_m = {v for e in matching for v in e}
    I = set(independent)
    MW, covered = [], set()
    for a, b in matching:
        if a in NX and b in NX:
            MW.append((a, b))
            covered |= {a, b}
    for c in sorted(I & NX):
        if c in covered:
            continue
        for d in R.neighbors(c):
            if d in NX and d in in_m and d not in covered:
                MW.append((c, d))
                covered |= {c, d}
                break
    A = sorted((NX & I) - covered)
    B = sorted({u for a in A for u in R.neighbors(a)} - covered)
    mw_set = set(MW)
    MV = [(a, b) for a, b in matching
          if (a, b) not in mw_set and (a in NX) != (b in NX) and a not in covered and b not in covered]
    cert = StructureCertificate(X, MW, MV, A, B, matching, sorted(I), cluster_size, n, k, delta)
    cert.properties = verify_structure(R, cert)
    return cert


def verify_structure(R: Graph, cert: StructureCertificate) -> dict:
    """Re-derive (I)-(IV) and the construction invariants from scratch."""
    X, MW, MV, A, B = cert.X, cert.M_W, cert.M_V, set(cert.A_part), set(cert.B_part)
    NX = set(R.neighbors(X))
    L, n, k, delta = R.n, cert.n, cert.k, cert.delta
    vmw = [v for e in MW for v in e]
    vmv = [v for e in MV for v in e]
    in_m = {v for e in cert.matching for v in e}
    I = set(cert.independent)
    props: dict = {}
    props["matchings_valid"] = (len(set(vmw)) == len(vmw) and len(set(vmv)) == len(vmv)
                                and all(R.has_edge(a, b) for a, b in MW + MV))
    props["MW_edges_allowed"] = all(
        tuple(sorted((a, b))) in set(cert.matching) or (a in I and b in in_m) or (b in I and a in in_m)
        for a, b in MW)
    props["I_disjoint"] = not set(vmw) & set(vmv) and not A & set(vmv)
    props["II_inside_NX"] = set(vmw) <= NX and A <= NX
    props["II_MV_one_end"] = all((a in NX) != (b in NX) for a, b in MV)
    props["H_outside_MW"] = not (A | B) & set(vmw) and not A & B
    free_m = (NX & in_m) - set(vmw)
    props["no_A_to_free_M"] = all(not R.has_edge(a, c) for a in A for c in free_m)
    addable = [e for e in cert.matching if set(e) <= NX and not set(e) & set(vmw)]
    addable += [(c, d) for c in (NX & I) - set(vmw) for d in free_m if R.has_edge(c, d)]
    props["MW_maximal"] = not addable
    lhs3 = len(vmw) + Fraction(len(vmv), 2) + len(A)
    rhs3 = (1 + delta / 2) * k * Fraction(L, n)
    props["III"] = lhs3 >= rhs3
    props["III_values"] = [str(lhs3), str(rhs3)]
    rhs4 = (1 + delta / 2) * Fraction(k, 2) * Fraction(L, n) - Fraction(len(vmw), 2)
    props["IV"] = all(sum(1 for b in R.neighbors(a) if b in B) >= rhs4 for a in A)
    props["IV_bound"] = str(rhs4)
    props["all"] = all(v for key, v in props.items() if isinstance(v, bool))
    return props


def find_structure(G: Graph, P: RegularPartition, k: int, delta, *, check: bool = True, log: StageLog | None = None,
                   seed: int = 0, trials: int = 2000, bound: int = 16):
    """Halve P, find the matching structure and build the certificate.

    The degree hypotheses on G are logged.  A missing cluster X of large
    reduced degree always raises :class:`StructureError`, since it means
    the hypotheses fail.  With ``check`` a certificate that fails
    verification raises as well.  Returns ``(G', P', certificate)``.
    """
    delta = frac(delta)
    log = log if log is not None else StageLog(strict=False)
    log.enter("structure")
    log.check("min degree >= (1+delta)k/2", G.min_degree(), ">=", (1 + delta) * k / 2, hard=False)
    high = sum(1 for d in G.degrees if d >= (1 + delta) * k)
    log.check("#{deg >= (1+delta)k} >= ceil(delta n)", high, ">=", ceil_frac(delta * G.n), hard=False)
    G2, P2, ms = matching_structure(G, P, (1 + delta) * k / 2, check=False, seed=seed, trials=trials,
                                    bound=bound, log=StageLog(strict=False))
    R = build_reduced(P2).graph
    L, n2 = R.n, G2.n
    X = max(range(L), key=lambda c: (R.degree(c), -c))
    thr = (1 + delta / 2) * k * Fraction(L, n2)
    log.enter("structure")
    if not log.check("deg_R'(X) >= (1+delta/2)k|R'|/n'", R.degree(X), ">=", thr, hard=False):
        raise StructureError(f"no cluster of reduced degree >= {thr} (max is {R.degree(X)})")
    cert = structure_from_reduced(R, ms.matching, ms.independent, P2.cluster_size, n2, k, delta, X)
    for name in ("III", "IV"):
        log.check(f"structure ({name})", cert.properties[name], "==", True, hard=False)
    if check and not cert.properties["all"]:
        bad = [key for key, v in cert.properties.items() if v is False]
        raise StructureError(f"structure certificate failed: {bad}")
    return G2, P2, cert


# -- balancing ------------------------------------------------------------------------

def balance_components(items, M, lam) -> list[int]:
    """Indices J of a prefix of the items sorted by b/a (a = 0 last) whose
    total a + b stays within M.  ``M`` may be a :class:`Surd`."""
    lam = frac(lam)
    M = M if isinstance(M, Surd) else frac(M)
    items = [(frac(a), frac(b)) for a, b in items]
    if M < 0:
        raise PreconditionError("M >= 0", M, 0)
    for i, (a, b) in enumerate(items):
        if a < 0 or b < 0 or a + b > lam:
            raise PreconditionError(f"item {i} has 0 <= a, b and a + b <= lambda", a + b, lam)

    def key(i):
        a, b = items[i]
        return (a == 0, b / a if a else Fraction(0), i)

    J, total = [], Fraction(0)
    for i in sorted(range(len(items)), key=key):
        s = items[i][0] + items[i][1]
        if not total + s <= M:
            break
        J.append(i)
        total += s
    return sorted(J)


def verify_balance(items, J, M, lam) -> dict:
    """Both inequalities of the balancing statement, decided exactly."""
    lam = frac(lam)
    items = [(frac(a), frac(b)) for a, b in items]
    sI = sum((a + b for a, b in items), Fraction(0))
    sJ = sum((items[i][0] + items[i][1] for i in J), Fraction(0))
    aI = sum((a for a, _ in items), Fraction(0))
    bI = sum((b for _, b in items), Fraction(0))
    aJ = sum((items[i][0] for i in J), Fraction(0))
    bJ = sum((items[i][1] for i in J), Fraction(0))
    if isinstance(M, Surd):
        low_m = Surd(M.a - lam, M.c, M.x, M.n)
        lower = sJ >= sI or low_m <= sJ
        upper = M >= sJ
    else:
        M = frac(M)
        lower = min(M - lam, sI) <= sJ
        upper = sJ <= M
    ratio = aJ * bI >= aI * bJ
    return {"lower": lower, "upper": upper, "ratio": ratio, "sum_J": sJ, "sum_I": sI,
            "all": lower and upper and ratio}


# -- the cluster-guided loop ----------------------------------------------------------

class _Loop:
    """Bookkeeping for the loop over the cut set: unused vertices per
    cluster, reservations and the invariant record."""

    def __init__(self, G, P, cert, eps, rho, k, strict, notes):
        self.G, self.P, self.cert = G, P, cert
        self.eps, self.rho, self.k, self.strict = eps, rho, k, strict
        self.notes = notes
        self.cl = P.clusters
        self.m = P.cluster_size
        self.cmask = [mask_of(c) for c in self.cl]
        self.cid = [0] * G.n
        for i, c in enumerate(self.cl):
            for v in c:
                self.cid[v] = i
        self.R = build_reduced(P).graph
        self.NX = set(self.R.neighbors(cert.X))
        self.vmw = {v for e in cert.M_W for v in e}
        self.vmv = {v for e in cert.M_V for v in e}
        self.A = set(cert.A_part)
        self.B = set(cert.B_part)
        self.Y = [C for C in sorted(self.NX) if C in self.vmw or C in self.vmv or C in self.A]
        self.free = G.vertex_mask
        self.reserved = 0
        self.q = _root4(eps)
        self.invariants = {name: None for name in ("E1", "E2", "E3", "E4")}
        self.relaxed = {"seed_outside_X_prime": 0, "seed_outside_X": 0, "case_substitution": 0,
                        "ungood_pair": 0, "spill": 0}

    def U(self, C) -> int:
        return self.free & self.cmask[C]

    def typical(self, v, C) -> bool:
        c = self.cid[v]
        if c == C:
            return False
        d = self.P.density[c][C]
        u = self.U(C)
        size = u.bit_count()
        return d > 0 and size > 0 and self.G.deg_into(v, u) > (d - self.eps) * size

    def good(self, C) -> bool:
        return self.U(C).bit_count() >= Surd(0, 7 * self.m, self.eps, 4)

    def dump(self, step, s) -> dict:
        return {"step": step, "s": s, "unused": [self.U(C).bit_count() for C in range(len(self.cl))],
                "cluster_size": self.m, "reserved": self.reserved.bit_count()}

    def violated(self, name, step, s, message):
        if self.invariants[name] is None:
            self.invariants[name] = step
        if self.strict:
            raise LoopStarvation(name, step, message, self.dump(step, s))

    def check_invariants(self, step, s):
        floor2 = Surd(0, 5 * self.m, self.eps, 4)
        if any(not self.U(C).bit_count() > floor2 for C in range(len(self.cl))):
            self.violated("E2", step, s, "some cluster has at most 5 eps^(1/4) |C| unused vertices")
        for a, b in self.cert.M_W:
            if abs(self.U(a).bit_count() - self.U(b).bit_count()) > self.eps * self.m:
                self.violated("E4", step, s, f"M_W edge {a}-{b} is out of balance")
                break


def _component_order(Tr: RootedTree, comp: frozenset, top: int) -> list[int]:
    out = [top]
    for u in out:
        out.extend(c for c in Tr.children[u] if c in comp)
    return out


def _place_component(st: _Loop, Tr, comp, top, v, C_root, C_other, S, res, allow_spill):
    """Map one component into (C_root, C_other); returns the partial map or None."""
    G = st.G
    depth = Tr.depth
    phi = {}
    free = st.free
    spills = 0
    X = st.cert.X
    for u in _component_order(Tr, comp, top):
        target = C_root if (depth[u] - depth[top]) % 2 == 0 else C_other
        other = C_other if target == C_root else C_root
        p_img = v if u == top else phi[Tr.parent[u]]
        if u == top:
            pool = (res.get(C_root, 0) or (st.cmask[C_root] & ~st.reserved)) & free & G.adj[p_img]
        else:
            pool = free & ~st.reserved & st.cmask[target] & G.adj[p_img]
        if not pool and allow_spill:
            pool = free & ~st.reserved & G.adj[p_img]
            spills += bool(pool)
        if not pool:
            return None
        needs_x = any(c in S for c in Tr.children[u])
        has_kids = any(c in comp for c in Tr.children[u])
        other_free = free & st.cmask[other]
        x_free = free & st.cmask[X]
        dXo = st.P.density

        def score(y):
            cy = st.cid[y]
            typ_x = needs_x and G.deg_into(y, x_free) > (dXo[cy][X] - st.eps) * x_free.bit_count() and cy != X
            typ_o = has_kids and G.deg_into(y, other_free) > (dXo[cy][other] - st.eps) * other_free.bit_count()
            return (typ_x, typ_o, (G.adj[y] & other_free).bit_count(), -y)

        y = max(bits(pool), key=score)
        phi[u] = y
        free &= ~(1 << y)
    st.relaxed["spill"] += spills
    return phi


def _candidate_pairs(st: _Loop, case: int, v: int, res: dict, strict_good: bool):
    """(C_root, C_other) pairs for one case, best first."""
    good = st.good if strict_good else (lambda C: True)
    out = []
    if case == 1:
        for a, b in st.cert.M_V:
            C, D = (a, b) if a in st.NX else (b, a)
            if C in res and good(C) and good(D):
                out.append((C, D))
    elif case == 2:
        for C in st.cert.A_part:
            if C in res and good(C):
                for D in st.R.neighbors(C):
                    if D in st.B and good(D):
                        out.append((C, D))
    else:
        for a, b in st.cert.M_W:
            if a in res and b in res and good(a) and good(b):
                ua, ub = st.U(a).bit_count(), st.U(b).bit_count()
                out.append((a, b) if ua >= ub else (b, a))
    out.sort(key=lambda e: (-(st.U(e[0]).bit_count() + st.U(e[1]).bit_count()), e))
    return out


def _zone_ok(st: _Loop, case: int, part: dict, Tr, top) -> bool:
    """Images of one component land in the zones prescribed for its case."""
    depth = Tr.depth
    zone_a = st.A | (st.vmv & st.NX)
    zone_b = st.B | (st.vmv - st.NX)
    for u, y in part.items():
        c = st.cid[y]
        if case == 3:
            if c not in st.vmw:
                return False
        elif (depth[u] - depth[top]) % 2 == 0:
            if c not in zone_a:
                return False
        elif c not in zone_b:
            return False
    return True


def _linear_loop(G2, P2, cert, T, k, eps, rho, beta, strict, log, notes):
    st = _Loop(G2, P2, cert, eps, rho, k, strict, notes)
    depth0 = T.depth
    C0 = [v for v in range(T.n) if depth0[v] % 2 == 0]
    D0 = [v for v in range(T.n) if depth0[v] % 2 == 1]
    A_cls, B_cls = (C0, D0) if len(C0) >= len(D0) else (D0, C0)
    r = min(B_cls)
    Tr = T.rerooted(r)
    cut = even_cut_set(Tr, beta, check_degree=strict)
    S = cut.cut_set
    comps = cut.components
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    A_set = set(A_cls)
    items = [(len(c & A_set), len(c) - len(c & A_set)) for c in comps]
    w = len(st.vmw) * st.m
    M = Surd(k - w, 11 * w, eps, 4)
    lam = beta * k
    J = set(balance_components(items, M, lam))
    bal = verify_balance(items, sorted(J), M, lam)
    log.check("balancing inequalities", bal["all"], "==", True)
    notes.update({"cut_set": len(S), "components": len(comps), "P1": len(J), "P2": len(comps) - len(J),
                  "beta": beta, "r": r})
    mv_total = len(st.vmv) * st.m
    case1_floor = shrink(Fraction(mv_total, 2), 10, eps, 4)
    phi: dict[int, int] = {}
    cases = {1: 0, 2: 0, 3: 0}
    S_order = [v for v in Tr.bfs_order() if v in S]
    X = cert.X
    for j, s in enumerate(S_order):
        p = Tr.parent[s]
        w_img = phi.get(p) if p >= 0 else None
        if w_img is not None and not st.typical(w_img, X):
            st.violated("E1", j, s, "parent image is not typical to X")
        pool = st.U(X)
        if w_img is not None:
            pool &= G2.adj[w_img]
        if not pool:
            if strict or w_img is None:
                raise LoopStarvation("E1", j, "no unused vertex of X next to the parent image", st.dump(j, s))
            pool = st.free & G2.adj[w_img]
            st.relaxed["seed_outside_X"] += 1
            if not pool:
                raise LoopStarvation("E1", j, "parent image has no unused neighbour", st.dump(j, s))
        need = shrink(len(st.Y), 1, eps)

        def seed_score(x):
            sc = sum(1 for C in st.Y if st.typical(x, C))
            return (sc >= need, sc, (G2.adj[x] & st.free).bit_count(), -x)

        v = max(bits(pool), key=seed_score)
        if not seed_score(v)[0]:
            st.relaxed["seed_outside_X_prime"] += 1
        phi[s] = v
        st.free &= ~(1 << v)
        size = ceil_frac(2 * eps * st.m + rho * k)
        res = {}
        for C in range(len(st.cl)):
            if st.typical(v, C):
                cand = sorted(bits(G2.adj[v] & st.U(C)))[:size]
                res[C] = mask_of(cand)
        st.reserved = 0
        for m_ in res.values():
            st.reserved |= m_
        for c in Tr.children[s]:
            if c in S or c in phi:
                continue
            ci = comp_of[c]
            comp = comps[ci]
            if ci in J:
                mv_unused = sum(st.U(C).bit_count() for C in st.vmv)
                case = 1 if mv_unused > case1_floor else 2
            else:
                case = 3
            tiers = [(case, True, False)]
            if not strict:
                others = [x for x in (1, 2, 3) if x != case]
                tiers += [(case, False, False)] + [(x, False, False) for x in others]
                tiers += [(0, False, True)]
            placed = None
            for tier, (cs, strict_good, anywhere) in enumerate(tiers):
                if anywhere:
                    pairs = [(C, D) for C in sorted(range(len(st.cl)), key=lambda C: -st.U(C).bit_count())
                             for D in st.R.neighbors(C) if G2.adj[v] & st.U(C)]
                else:
                    pairs = _candidate_pairs(st, cs, v, res, strict_good)
                for C, D in pairs:
                    part = _place_component(st, Tr, comp, c, v, C, D, S, res, allow_spill=not strict)
                    if part is not None:
                        placed = (part, tier, cs)
                        break
                if placed:
                    break
            if placed is None:
                raise LoopStarvation("E3", j, f"no cluster pair takes the component at {c} (case {case})",
                                     st.dump(j, s))
            part, tier, cs = placed
            if tier:
                st.relaxed["case_substitution" if cs != case else "ungood_pair"] += 1
            if not _zone_ok(st, case, part, Tr, c):
                st.violated("E3", j, s, f"component at {c} left its case-{case} zone")
            cases[case] += 1
            for u, y in part.items():
                phi[u] = y
                st.free &= ~(1 << y)
                st.reserved &= ~(1 << y)
        st.reserved = 0
        st.check_invariants(j, s)
    notes["cases"] = cases
    notes["relaxations"] = dict(st.relaxed)
    notes["invariants"] = {name: ("held" if step is None else f"first broken at step {step}")
                           for name, step in st.invariants.items()}
    if len(phi) != T.n:
        raise LoopStarvation("E3", len(S_order), f"{T.n - len(phi)} tree vertices left unplaced")
    return phi


def default_rho(eps) -> Fraction:
    """eps^2 / (16 M0^2) with M0 = ceil(1/eps), the smallest admissible cluster count."""
    eps = frac(eps)
    m0 = ceil_frac(1 / eps)
    return eps * eps / (16 * m0 * m0)


def embed_linear_degree(G: Graph, k: int, delta, T: RootedTree, *, config: Config | None = None,
                        check: bool | None = None, log: StageLog | None = None) -> Embedding:
    """Embed T into a host with min degree (1+delta)k/2 and at least
    ceil(delta n) vertices of degree (1+delta)k.

    Refine, extract the structure, cut T at an even cut set and run the
    cluster-guided loop.  In lenient runs a starved case may borrow another
    case's cluster pairs or spill outside its pair.  Every relaxation is
    counted in ``notes['relaxations']``.
    """
    cfg = config or Config()
    strict = cfg.strict if check is None else check
    delta, eps = frac(delta), cfg.eps
    log = log if log is not None else StageLog(strict)
    log.enter("linear-degree")
    G = _fresh(G)
    n = G.n
    rho = cfg.rho if cfg.rho is not None else default_rho(eps)
    log.check("T has k edges", T.k, "==", k)
    log.check("min degree >= (1+delta)k/2", G.min_degree(), ">=", (1 + delta) * k / 2)
    high = sum(1 for d in G.degrees if d >= (1 + delta) * k)
    log.check("#{deg >= (1+delta)k} >= ceil(delta n)", high, ">=", ceil_frac(delta * n))
    log.check("max degree of T <= rho k", T.max_degree(), "<=", rho * k)
    notes: dict = {"rho": rho}
    if T.k == 0:
        return _finish(T, G, {T.root: 0}, "linear-degree", notes, "linear-degree")
    try:
        G1, P = refine_partition(G, eps, cfg.eta, max_clusters=cfg.max_clusters, seed=cfg.seed,
                                 trials=cfg.trials, bound=cfg.exhaustive_bound, enforce=strict)
        notes["partition"] = dict(P.report)
        G2, P2, cert = find_structure(G1, P, k, delta / 2, check=strict, log=log, seed=cfg.seed,
                                      trials=cfg.trials, bound=cfg.exhaustive_bound)
        notes["structure"] = {"X": cert.X, "M_W": len(cert.M_W), "M_V": len(cert.M_V),
                              "A": len(cert.A_part), "B": len(cert.B_part), "all": cert.properties["all"]}
        log.enter("linear-degree")
        L = P2.size
        beta = eps / L
        log.check("k >= 1/beta", k, ">=", 1 / beta)
        log.check("max degree of T <= beta^2 k / 2", T.max_degree(), "<=", beta * beta * k / 2)
        if k < 1 / beta:
            # desk scale: keep the pieces near sqrt(k) vertices
            beta = max(beta, Fraction(1, max(3, isqrt(k))))
            notes["beta_relaxed"] = str(beta)
        phi2 = _linear_loop(G2, P2, cert, T, k, eps, rho, beta, strict, log, notes)
        phi = {t: G2.labels[x] for t, x in phi2.items()}
        notes["fallback"] = False
    except LoopStarvation as exc:
        if strict:
            raise
        notes["starvation"] = {"invariant": exc.invariant, "step": exc.step, "state": exc.state}
        phi = _mapping(_fallback(T, G, notes, exc, cfg.budget))
    except _SOFT + (PreconditionError,) as exc:
        if strict:
            raise
        phi = _mapping(_fallback(T, G, notes, exc, cfg.budget))
    return _finish(T, G, phi, "linear-degree", notes, "linear-degree")


def _mapping(emb):
    return None if emb is None else emb.mapping


# -- average degree boost ------------------------------------------------------------

def embed_avg_boost(G: Graph, k: int, delta, T: RootedTree, *, inner_delta=None, config: Config | None = None,
                    check: bool | None = None, log: StageLog | None = None) -> Embedding:
    """Embed T into a host with d(G) >= (1+delta)k and n >= k >= delta n.

    After peeling to min degree (1+delta)k/2, either enough vertices have
    degree (1 + inner)k and the linear-degree loop runs, or the few vertices
    of degree below (1 - inner^(1/4))^2 (1+delta)k are deleted and T is
    embedded greedily.  ``inner`` defaults to delta^12.
    """
    cfg = config or Config()
    strict = cfg.strict if check is None else check
    delta = frac(delta)
    inner = delta ** 12 if inner_delta is None else frac(inner_delta)
    log = log if log is not None else StageLog(strict)
    log.enter("avg-boost")
    G = _fresh(G)
    n = G.n
    log.check("T has k edges", T.k, "==", k)
    if not log.check("d(G) >= (1+delta)k", 2 * G.edge_count, ">=", (1 + delta) * k * n, hard=False):
        raise PreconditionError("d(G) >= (1+delta)k", Fraction(2 * G.edge_count, max(n, 1)), (1 + delta) * k)
    log.check("n >= k", n, ">=", k)
    log.check("k >= delta n", k, ">=", delta * n)
    G1 = peel_min_degree(G, (1 + delta) * k / 2)
    n1 = G1.n
    log.check("peeled d >= (1+delta)k", 2 * G1.edge_count, ">=", (1 + delta) * k * n1)
    notes: dict = {"peeled_order": n1, "inner_delta": inner}
    try:
        if n1 == 0:
            raise EmbeddingFailure("peeling removed every vertex", "avg-boost")
        high = sum(1 for d in G1.degrees if d >= (1 + inner) * k)
        if high >= ceil_frac(inner * n1):
            notes["branch"] = "linear-degree"
            emb = embed_linear_degree(G1, k, inner, T, config=cfg, check=strict, log=log)
            notes["inner"] = emb.notes
            phi = {t: G1.labels[x] for t, x in emb.mapping.items()}
            notes["fallback"] = emb.notes.get("fallback", False)
        else:
            notes["branch"] = "deletion"
            t = (1 + delta) * k
            degs = list(G1.degrees)
            dich = concentration_dichotomy(WeightedFunction(degs), t, inner)
            notes["dichotomy"] = dich.to_dict()
            low = set(low_set_weak(degs, t, inner))
            log.enter("avg-boost")
            log.check("#low <= inner^(1/4) |G'|", len(low), "<=", root_times(n1, inner, 4))
            keep = [x for x in range(n1) if x not in low]
            G2 = G1.induced(keep)
            notes["deleted"] = len(low)
            log.check("min degree after deletion >= k", G2.min_degree(), ">=", k)
            v = max(range(G2.n), key=lambda x: (G2.degree(x), -x))
            emb = greedy_embed_h(T, G2, 0, v, check=strict)
            phi = {t_: G1.labels[keep[x]] for t_, x in emb.mapping.items()}
            notes["fallback"] = False
    except _SOFT + (PreconditionError,) as exc:
        if strict:
            raise
        phi = _mapping(_fallback(T, G, notes, exc, cfg.budget))
    return _finish(T, G, phi, "avg-boost", notes, "avg-boost")


# -- non-bipartite structure ---------------------------------------------------------

@dataclass
class NonbipStructure:
    graph: Graph
    I: list
    V1: list
    V2: list
    properties: dict
    eta: Fraction
    k: int

    def to_dict(self) -> dict:
        return render({"I": len(self.I), "V1": len(self.V1), "V2": len(self.V2), "eta": self.eta,
                       "k": self.k, "properties": self.properties})


def _sqrt_lower(x, scale: int = 10 ** 6) -> Fraction:
    return Fraction(root_floor(frac(x) * scale * scale), scale)


def nonbip_structure(G: Graph, P: RegularPartition, k: int, M0: int | None = None, *, eta=None,
                     seed: int = 0, trials: int = 2000, bound: int = 16) -> NonbipStructure:
    """Attempt the I, V1, V2 split of a host whose reduced graph is connected
    and not bipartite, and report which of (a)-(d) hold.

    (a) (1 - 3 sqrt eta) k/2 <= |V_i| <= (1 + 3 sqrt eta) k/2
    (b) I has at least |G'| - (1 + 3 sqrt eta) k vertices, is independent in G'
        and sends no edge to V2
    (c) at least (1 - 4 eta^(1/4))|V1| vertices of V1 have degree >= (1 - 5 eta^(1/4)) n
    (d) at least (1 - 2 eta^(1/8))|V2| vertices of V2 have degree >= (1 - 3 eta^(1/8)) k
    """
    eta = P.eta if eta is None else frac(eta)
    n = G.n
    t = (1 - 3 * _sqrt_lower(eta)) * k / 2
    G2, P2, ms = matching_structure(G, P, t, check=False, seed=seed, trials=trials, bound=bound,
                                    log=StageLog(False), prefer_large_independent=True)
    cl = P2.clusters
    I = sorted(v for c in ms.independent for v in cl[c])
    V1 = sorted(v for c in ms.V1 for v in cl[c])
    V2 = sorted(v for c in ms.V2 for v in cl[c])
    Im, V2m = mask_of(I), mask_of(V2)
    props: dict = {"clusters": P2.size, "M0": M0 if M0 is not None else P.size}
    props["a"] = all(shrink(Fraction(k, 2), 3, eta) <= len(V) <= grow(Fraction(k, 2), 3, eta) for V in (V1, V2))
    # I must absorb what V1 and V2 cannot hold, so an empty I fails on dense hosts
    props["b"] = (grow(k, 3, eta) >= G2.n - len(I) and G2.e_inside(Im) == 0
                  and G2.e_between(Im, V2m) == 0)
    good1 = sum(1 for x in V1 if G2.degree(x) >= Surd(n, -5 * n, eta, 4))
    props["c"] = good1 >= Surd(len(V1), -4 * len(V1), eta, 4)
    good2 = sum(1 for x in V2 if G2.degree(x) >= Surd(k, -3 * k, eta, 8))
    props["d"] = good2 >= Surd(len(V2), -2 * len(V2), eta, 8)
    props["sizes"] = {"I": len(I), "V1": len(V1), "V2": len(V2)}
    props["all"] = props["a"] and props["b"] and props["c"] and props["d"]
    return NonbipStructure(G2, I, V1, V2, props, eta, k)


def nonbip_matching_predicate(R: Graph, k: int, n: int, eps) -> list[dict]:
    """Per non-bipartite component of the reduced graph R (clusters of a
    partition of an n-vertex host): does a maximum matching of the
    component have at least (1 + 100 sqrt eps)(k/2)(|R|/n) edges?

    Diagnostic only; embedding is left to :func:`embed_nonbip_dense`.
    """
    eps = frac(eps)
    need = grow(Fraction(k * R.n, 2 * n), 100, eps)
    out = []
    for comp in R.components():
        H = R.induced(comp)
        if H.two_colouring() is not None:
            continue
        size = len(graph_max_matching(H))
        out.append({"clusters": len(comp), "matching": size, "need": need, "holds": size >= need})
    return out


def embed_nonbip_dense(G: Graph, structure: NonbipStructure, delta, T: RootedTree, *, config: Config | None = None,
                       check: bool | None = None, log: StageLog | None = None) -> Embedding:
    """Embed T using the I, V1, V2 split: part of a cut subtree is routed
    through I (bare paths U1-I-U1, or leaves hung into I from U1) until
    ceil(delta k/100) vertices of I are used, the rest stays in H = U1 u U2.

    ``structure.graph`` labels into ``G``.
    """
    cfg = config or Config()
    strict = cfg.strict if check is None else check
    delta = frac(delta)
    log = log if log is not None else StageLog(strict)
    log.enter("nonbip-dense")
    G = _fresh(G)
    k, eta = structure.k, structure.eta
    Gs = structure.graph
    lab = Gs.labels
    log.check("T has k edges", T.k, "==", k)
    for key in ("a", "b", "c", "d"):
        log.check(f"structure property ({key})", structure.properties[key], "==", True)
    U1 = [lab[x] for x in structure.V1 if Gs.degree(x) >= Surd(G.n, -5 * G.n, eta, 4)]
    U2 = [lab[x] for x in structure.V2 if Gs.degree(x) >= Surd(k, -3 * k, eta, 8)]
    Hm = mask_of(U1) | mask_of(U2)
    U1m = mask_of(U1)
    Im = mask_of(lab[x] for x in structure.I)
    hmin = min(((G.adj[x] & Hm).bit_count() for x in bits(Hm)), default=0)
    log.check("min degree of H >= (1 - 6 eta^(1/8))k", hmin, ">=", Surd(k, -6 * k, eta, 8))
    target = ceil_frac(delta * k / 100)
    notes: dict = {"U1": len(U1), "U2": len(U2), "I_target": target}
    try:
        if T.k < 2 or not U1m:
            raise EmbeddingFailure("tree or U1 too small for the cut subtree step", "nonbip-dense")
        cert = find_cut_subtree(T, Fraction(1, 2), check_size=False)
        t_star = cert.anchor
        Ts, ids = T.induced_subtree(cert.subtree, t_star)
        bare = leaves_or_bare_paths(Ts, 3)
        notes["case"] = 1 if bare.kind == "paths" else 2
        route = {}
        depth = Ts.depth
        if bare.kind == "paths":
            for path in bare.paths:
                if len(route) // 3 >= target:
                    break
                p = sorted(path, key=lambda u: depth[u])
                route[p[1]], route[p[2]], route[p[3]] = "U1", "I", "U1"
        else:
            hung = 0
            for leaf in bare.leaves:
                if hung >= target:
                    break
                if leaf == 0:
                    continue
                route[leaf] = "I"
                route[Ts.parent[leaf]] = "U1"
                hung += 1
        zone = {"U1": U1m, "I": Im, "H": Hm}
        start = max(bits(U1m), key=lambda x: ((G.adj[x] & Im).bit_count(), (G.adj[x] & Hm).bit_count(), -x))
        phi_s = {0: start}
        trace: dict = {}
        order = [u for u in Ts.preorder() if u != 0]
        greedy_place(Ts, G, order, phi_s, trace, lambda u: zone[route.get(u, "H")], prefer=Hm | Im,
                     stage="nonbip-dense")
        phi = {ids[u]: x for u, x in phi_s.items()}
        notes["I_used"] = sum(1 for x in phi.values() if Im >> x & 1)
        rest = [v for v in range(T.n) if v not in cert.subtree or v == t_star]
        Tp, rest_ids = T.induced_subtree(rest, t_star)
        phi_p = {0: phi[t_star]}
        used = mask_of(phi.values())
        greedy_place(Tp, G, root_children_first(Tp), phi_p, trace,
                     lambda u: Hm & ~used, prefer=Hm & ~used, stage="nonbip-dense")
        for u, x in phi_p.items():
            phi[rest_ids[u]] = x
        log.check("I-vertices used >= ceil(delta k/100)", notes["I_used"], ">=", target)
        notes["fallback"] = False
    except _SOFT + (PreconditionError,) as exc:
        if strict:
            raise
        phi = _mapping(_fallback(T, G, notes, exc, cfg.budget))
    return _finish(T, G, phi, "nonbip-dense", notes, "nonbip-dense")


# -- bipartite reduced graphs ----------------------------------------------------------

def _sides(R: Graph, V_sub) -> tuple[list[int], list[int]]:
    col = R.two_colouring()
    if col is None:
        raise PreconditionError("reduced graph is bipartite")
    if not V_sub:
        raise PreconditionError("V_sub is non-empty")
    side = col[V_sub[0]]
    if any(col[c] != side for c in V_sub):
        raise PreconditionError("V_sub lies in one colour class")
    comp = next(c for c in R.components() if V_sub[0] in c)
    return [c for c in comp if col[c] == side], [c for c in comp if col[c] != side]


def bipartite_forest_embed(G: Graph, R: ReducedGraph, V_sub, k1: int, k2: int, T: RootedTree, *, eps=None,
                           check: bool = False, budget: int = 2_000_000, log: StageLog | None = None) -> Embedding:
    """Embed T with one colour class (at most k1 vertices) in the clusters
    ``V_sub`` and the other (at most k2) in the opposite side of R.

    T is cut at a cut set; pieces are placed one at a time into a cluster
    pair next to the image of their parent.  G is the partitioned graph and
    R its reduced graph.
    """
    log = log if log is not None else StageLog(check)
    log.enter("forest")
    eps = frac(eps) if eps is not None else Fraction(1, 25)
    V_sub = sorted(V_sub)
    Aside, Bside = _sides(R.graph, V_sub)
    L, n = R.graph.n, G.n
    ratio = Fraction(L, n)
    log.check("(i) deg_R(C) >= (1+100 sqrt eps) k2 |R|/n on V",
              min(R.graph.degree(c) for c in V_sub), ">=", grow(k2 * ratio, 100, eps))
    if not log.check("(ii) |V| >= (1+100 sqrt eps) k1 |R|/n", len(V_sub), ">=", grow(k1 * ratio, 100, eps)):
        if check:
            raise PreconditionError("(ii) |V| >= (1+100 sqrt eps) k1 |R|/n", len(V_sub), k1 * ratio)
    depth = T.depth
    C0 = frozenset(v for v in range(T.n) if depth[v] % 2 == 0)
    D0 = frozenset(range(T.n)) - C0
    if len(C0) <= k1 and len(D0) <= k2:
        on_v = C0
    elif len(D0) <= k1 and len(C0) <= k2:
        on_v = D0
    else:
        log.check("colour classes fit k1, k2", max(len(C0), len(D0)), "<=", max(k1, k2), hard=False)
        on_v = C0 if len(C0) >= len(D0) else D0
    cl = R.clusters
    Vm = mask_of(v for c in V_sub for v in cl[c])
    Bm = mask_of(v for c in Bside for v in cl[c])
    notes: dict = {"V": len(V_sub), "B": len(Bside)}
    domains = {u: (Vm if u in on_v else Bm) for u in range(T.n)}
    phi: dict[int, int] = {}
    try:
        Vset = set(V_sub)
        pairs = [(C, D) for C in V_sub for D in R.graph.neighbors(C) if D in set(Bside)]
        if not pairs:
            raise EmbeddingFailure("no dense pair between V and the other side", "forest")
        m = len(cl[0])
        if len(pairs) == 1 and T.n <= eps * m:
            C, D = pairs[0]
            emb = regular_pair_tree_embed(G, cl[C], cl[D], cl[C], cl[D], 0, T, eps,
                                          root_side="A" if T.root in on_v else "B", check=False,
                                          log=StageLog(False))
            phi = dict(emb.mapping)
            notes["route"] = "single-pair"
        else:
            beta = eps if T.k >= 1 / eps else Fraction(1, max(2, T.k))
            if T.k >= 2:
                S = cut_set(T, beta).cut_set
            else:
                S = frozenset([T.root])
            pieces = [frozenset([s]) for s in S] + components_without(T, S)
            top_of = {}
            for piece in pieces:
                top = min(piece, key=lambda u: (depth[u], u))
                top_of[top] = piece
            used = 0
            placed_pieces = 0
            for top in sorted(top_of, key=lambda u: (depth[u], u)):
                piece = top_of[top]
                Tp, ids = T.induced_subtree(piece, top)
                p = T.parent[top]
                y = phi.get(p) if p >= 0 else None
                top_on_v = top in on_v
                cands = []
                for C, D in pairs:
                    tgt = C if top_on_v else D
                    room = (G.adj[y] if y is not None else G.vertex_mask) & mask_of(cl[tgt]) & ~used
                    if room:
                        free_pair = (mask_of(cl[C]) | mask_of(cl[D])) & ~used
                        cands.append((-room.bit_count(), -free_pair.bit_count(), C, D))
                cands.sort()
                done = None
                for _, _, C, D in cands[:8]:
                    dom = {0: G.adj[y]} if y is not None else {}
                    try:
                        emb = regular_pair_tree_embed(G, cl[C], cl[D], cl[C], cl[D], used, Tp, eps,
                                                      root_side="A" if top_on_v else "B", domains=dom,
                                                      check=False, log=StageLog(False))
                    except EmbeddingFailure:
                        continue
                    done = emb
                    break
                if done is None:
                    raise EmbeddingFailure(f"no cluster pair takes the piece at {top}", "forest")
                for u, x in done.mapping.items():
                    phi[ids[u]] = x
                    used |= 1 << x
                placed_pieces += 1
            notes["route"] = "pieces"
            notes["pieces"] = placed_pieces
            notes["V_used"] = len(Vset)
        notes["fallback"] = False
    except _SOFT as exc:
        phi = _mapping(_fallback(T, G, notes, exc, budget, domains=domains))
    emb = _finish(T, G, phi, "forest", notes, "forest")
    for u, x in emb.mapping.items():
        if not domains[u] >> x & 1:
            raise EmbeddingFailure(f"vertex {u} left its side", "forest")
    return emb


def embed_bip_reduced(G: Graph, P: RegularPartition, k: int, delta, T: RootedTree, *,
                      config: Config | None = None, check: bool | None = None,
                      log: StageLog | None = None) -> Embedding:
    """Embed T into a partitioned host whose reduced graph is connected and
    bipartite with |U A| >= (1+delta)k.  ``G`` is the partitioned graph."""
    cfg = config or Config()
    strict = cfg.strict if check is None else check
    delta = frac(delta)
    eta = P.eta
    log = log if log is not None else StageLog(strict)
    log.enter("bip-reduced")
    Rg = build_reduced(P)
    R = Rg.graph
    n, L = G.n, R.n
    log.check("reduced graph is connected", len(R.components()), "==", 1)
    col = R.two_colouring()
    if col is None:
        raise PreconditionError("reduced graph is bipartite")
    m = P.cluster_size
    side0 = [c for c in range(L) if col[c] == 0]
    side1 = [c for c in range(L) if col[c] == 1]
    scA, scB = (side0, side1) if len(side0) >= len(side1) else (side1, side0)
    log.check("(i) d(G) >= (1 - 3 sqrt eta) k", G.average_degree(), ">=", shrink(k, 3, eta))
    log.check("(ii) min degree >= (1 - 3 sqrt eta) k/2", G.min_degree(), ">=", shrink(Fraction(k, 2), 3, eta))
    log.check("(iii) |U A| >= (1+delta) k", len(scA) * m, ">=", (1 + delta) * k)
    depth = T.depth
    C0 = [v for v in range(T.n) if depth[v] % 2 == 0]
    D0 = [v for v in range(T.n) if depth[v] % 2 == 1]
    a, b = max(len(C0), len(D0)), min(len(C0), len(D0))
    half = Fraction(k, 2)
    window = (shrink(half, 4, eta) < b and b <= Fraction(k + 1, 2) <= a and a <= grow(half, 4, eta))
    notes: dict = {"classes": [a, b], "window": window}
    t = Fraction(L, n)
    if not window:
        notes["branch"] = "direct"
        emb = bipartite_forest_embed(G, Rg, scA, a, b, T, eps=P.eps, check=strict, budget=cfg.budget, log=log)
    else:
        thr = grow(half * t, 1, eta)
        VA = [c for c in scA if R.degree(c) >= thr]
        VB = [c for c in scB if R.degree(c) >= thr]
        log.check("|V_A| + |V_B| >= (1 + sqrt eta) k t", len(VA) + len(VB), ">=", grow(k * t, 1, eta))
        if VA and len(VA) >= thr:
            notes["branch"] = "V_A"
            emb = bipartite_forest_embed(G, Rg, VA, a, b, T, eps=P.eps, check=strict, budget=cfg.budget, log=log)
        elif VB and len(VB) >= thr:
            notes["branch"] = "V_B"
            emb = bipartite_forest_embed(G, Rg, VB, a, b, T, eps=P.eps, check=strict, budget=cfg.budget, log=log)
        else:
            log.check("|V_A| or |V_B| >= (1 + sqrt eta)(k/2) t", max(len(VA), len(VB)), ">=", thr)
            notes["branch"] = "counting-failed"
            best = VA if len(VA) >= len(VB) else VB
            emb = bipartite_forest_embed(G, Rg, best or scA, a, b, T, eps=P.eps, check=strict,
                                         budget=cfg.budget, log=log)
    emb.notes = {**notes, **emb.notes}
    emb.route = "bip-reduced"
    return emb


# -- top level dispatch ----------------------------------------------------------------

@dataclass
class DispatchPlan:
    G: Graph
    G0: Graph
    k: int
    Delta: int
    route: str
    bipartition: Bipartition | None = None
    G1: Graph | None = None
    partition: RegularPartition | None = None
    components: list = field(default_factory=list)
    comp_bipartite: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _plan(G: Graph, k: int, Delta: int, cfg: Config, log: StageLog) -> DispatchPlan:
    nu, eps, eta = cfg.nu, cfg.eps, cfg.eta
    G0 = peel_min_degree(G, Fraction(k, 2))
    n0 = G0.n
    summary: dict = {"peeled_order": n0}
    log.check("peeled d > k - 1", 2 * G0.edge_count, ">", (k - 1) * n0)
    if n0 <= (1 + nu) * k:
        return DispatchPlan(G, G0, k, Delta, "almost-complete", summary=summary)
    bp = best_bipartition(G0)
    intra = intra_edges(G0, bp)
    summary["bipartition"] = {"sides": sorted([len(bp.A), len(bp.B)]), "intra": intra}
    if intra <= nu * G0.edge_count and max(len(bp.A), len(bp.B)) <= (1 + nu) * k:
        return DispatchPlan(G, G0, k, Delta, "almost-complete-bipartite", bipartition=bp, summary=summary)
    plan = DispatchPlan(G, G0, k, Delta, "regularity", summary=summary)
    if n0 < 2 * ceil_frac(1 / eps):
        summary["regularity"] = "skipped: host below 2 ceil(1/eps) vertices"
        plan.route = "exact"
        return plan
    G1, P = refine_partition(G0, eps, eta, max_clusters=cfg.max_clusters, seed=cfg.seed, trials=cfg.trials,
                             bound=cfg.exhaustive_bound, enforce=False)
    plan.G1, plan.partition = G1, P
    summary["partition"] = dict(P.report)
    Rg = build_reduced(P)
    ell = P.size
    comps = Rg.graph.components()
    # U_i in ids of G; G1 labels into G0, G0 labels into G
    U = [set(G0.labels[G1.labels[v]] for c in comp for v in P.clusters[c]) for comp in comps]
    placed = set().union(*U) if U else set()
    leftover = sorted(G0.labels[x] for x in range(n0) if G0.labels[x] not in placed)
    worst = None
    for x in leftover:
        i = max(range(len(U)), key=lambda i: (G.deg_into(x, mask_of(U[i])), -i))
        d = G.deg_into(x, mask_of(U[i]))
        worst = d if worst is None else min(worst, d)
        U[i].add(x)
    if leftover:
        log.check("redistributed deg(x, U_i) >= k/(2 l)", worst, ">=", Fraction(k, 2 * ell))
    plan.components = [sorted(u) for u in U]
    plan.comp_bipartite = [Rg.graph.induced(comp).two_colouring() is not None for comp in comps]
    stab = []
    for u in plan.components:
        H = G.induced(u)
        stab.append({"order": H.n, "avg": H.average_degree() if H.n else 0, "min": H.min_degree() if H.n else 0,
                     "avg_in_window": H.n > 0 and abs(H.average_degree() - k) <= nu * k / 2,
                     "min_ok": H.n > 0 and H.min_degree() >= (1 - nu / 2) * k / 2})
    summary["components"] = stab
    summary["redistributed"] = len(leftover)
    summary["nonbip_matching"] = nonbip_matching_predicate(Rg.graph, k, n0, eps)
    return plan


def _sub_partition(G1: Graph, P: RegularPartition, comp_clusters) -> tuple[Graph, RegularPartition]:
    order = [v for c in comp_clusters for v in P.clusters[c]]
    H = G1.induced(order)
    pos, clusters = 0, []
    for c in comp_clusters:
        clusters.append(list(range(pos, pos + len(P.clusters[c]))))
        pos += len(P.clusters[c])
    dens = [[P.density[a][b] for b in comp_clusters] for a in comp_clusters]
    idx = {c: i for i, c in enumerate(comp_clusters)}
    verdicts = {}
    for (a, b), v in P.verdicts.items():
        if a in idx and b in idx:
            i, j = sorted((idx[a], idx[b]))
            verdicts[(i, j)] = v
    return H, RegularPartition(clusters, P.eps, P.eta, dens, verdicts, exceptional=[])


def _greedy_within(T: RootedTree, G: Graph, root_img: int, allowed: int) -> dict:
    phi = {T.root: root_img}
    greedy_place(T, G, root_children_first(T), phi, {}, lambda u: allowed, prefer=allowed, stage="component-greedy")
    return phi


def _split_tree(T: RootedTree, k: int, Delta: int):
    """T* at gamma = 1/2 and a component T' of T - T* with k/(2 Delta) <= |T'| <= 3k/4."""
    cert = find_cut_subtree(T, Fraction(1, 2), check_size=False)
    t_star = cert.anchor
    lo, hi = Fraction(k, 2 * Delta), Fraction(3 * k, 4)
    comps = sorted(cert.components, key=lambda c: (-len(c), min(c)))
    window = [c for c in comps if lo <= len(c) <= hi]
    pick = window[0] if window else next((c for c in comps if len(c) <= hi), None)
    if pick is None:
        raise EmbeddingFailure("no component of T - T* fits the cross-edge window", "cross-edge")
    top = next(u for u in pick if T.parent[u] == t_star or (T.parent[t_star] == u))
    return t_star, pick, top, bool(window)


def _cross_edge(G: Graph, plan: DispatchPlan, T: RootedTree, notes: dict) -> dict:
    k, Delta = plan.k, plan.Delta
    t_star, Tp_set, top, in_window = _split_tree(T, k, Delta)
    notes["cross_window"] = in_window
    rest = [v for v in range(T.n) if v not in Tp_set]
    T_rest, rest_ids = T.induced_subtree(rest, t_star)
    T_top, top_ids = T.induced_subtree(Tp_set, top)
    masks = [mask_of(u) for u in plan.components]
    tried = 0
    for i, Ui in enumerate(masks):
        for j, Uj in enumerate(masks):
            if i == j:
                continue
            for ui in bits(Ui):
                for uj in bits(G.adj[ui] & Uj):
                    tried += 1
                    if tried > 64:
                        raise EmbeddingFailure("cross-edge attempts exhausted", "cross-edge")
                    try:
                        a = _greedy_within(T_rest, G, ui, Ui)
                        b = _greedy_within(T_top, G, uj, Uj)
                    except EmbeddingFailure:
                        continue
                    phi = {rest_ids[u]: x for u, x in a.items()}
                    phi.update({top_ids[u]: x for u, x in b.items()})
                    notes["cross_edge"] = [ui, uj]
                    return phi
    raise EmbeddingFailure("no cross-component edge carries the split", "cross-edge")


def _attempts(plan: DispatchPlan, T: RootedTree, cfg: Config):
    """Routes to try for one tree, in the order of the case analysis."""
    G, G0, k, Delta = plan.G, plan.G0, plan.k, plan.Delta
    lab0 = G0.labels
    if plan.route == "almost-complete":
        yield "almost-complete", lambda: {t: lab0[x] for t, x in embed_almost_complete(
            G0, k, T, eps=cfg.nu, gamma_cap=cfg.gamma_cap, check=False, budget=cfg.budget).mapping.items()}
    elif plan.route == "almost-complete-bipartite":
        yield "almost-complete-bipartite", lambda: {t: lab0[x] for t, x in embed_almost_complete_bipartite(
            G0, plan.bipartition, k, Delta, T, check=False).mapping.items()}
    elif plan.route == "regularity":
        P, G1 = plan.partition, plan.G1
        # the full-budget exact search closes the list, so inner fallbacks stay short
        inner = cfg.with_(budget=max(1000, cfg.budget // 50))
        comps = build_reduced(P).graph.components()
        order = sorted(range(len(plan.components)),
                       key=lambda i: (-G.induced(plan.components[i]).average_degree(), i))
        for i in order:
            U = plan.components[i]
            if len(U) < T.n:
                continue
            H1, Pc = _sub_partition(G1, P, comps[i])
            if plan.comp_bipartite[i]:
                def run(H1=H1, Pc=Pc):
                    emb = embed_bip_reduced(H1, Pc, k, cfg.delta, T, config=inner, check=False)
                    return {t: G0.labels[H1.labels[x]] for t, x in emb.mapping.items()}
                yield f"component-{i}-bip-reduced", run
            elif len(comps[i]) >= 2:
                def run(H1=H1, Pc=Pc):
                    ns = nonbip_structure(H1, Pc, k, seed=cfg.seed, trials=cfg.trials, bound=cfg.exhaustive_bound)
                    relabel = Graph.from_adjacency(list(ns.graph.adj),
                                                   labels=[G0.labels[x] for x in ns.graph.labels], validate=False)
                    ns2 = NonbipStructure(relabel, ns.I, ns.V1, ns.V2, ns.properties, ns.eta, ns.k)
                    return embed_nonbip_dense(G, ns2, cfg.delta, T, config=inner, check=False).mapping
                yield f"component-{i}-nonbip-dense", run
            Um = mask_of(U)
            root = max(U, key=lambda x: ((G.adj[x] & Um).bit_count(), -x))
            yield f"component-{i}-greedy", lambda Um=Um, root=root: _greedy_within(T, G, root, Um)
        if len(plan.components) >= 2 and T.k >= 2:
            yield "cross-edge", None
    if plan.route in ("regularity", "exact"):
        # clusters need not follow the components of the host
        for j, comp in enumerate(sorted(G0.components(), key=lambda c: (-len(c), c))):
            if len(comp) < T.n:
                continue
            Um = mask_of(lab0[x] for x in comp)
            root = max(bits(Um), key=lambda x: ((G.adj[x] & Um).bit_count(), -x))
            yield f"host-component-{j}-greedy", lambda Um=Um, root=root: _greedy_within(T, G, root, Um)


def dispatch_tree(plan: DispatchPlan, T: RootedTree, cfg: Config) -> dict:
    """Run the planned routes for one tree; the exact search closes the list."""
    G = plan.G
    notes: dict = {}
    attempts = []
    phi = None
    route = None
    for name, run in _attempts(plan, T, cfg):
        try:
            phi = _cross_edge(G, plan, T, notes) if run is None else run()
        except _SOFT + (PreconditionError,) as exc:
            attempts.append({"route": name, "outcome": f"{type(exc).__name__}: {exc}"})
            phi = None
            continue
        route = name
        attempts.append({"route": name, "outcome": "ok"})
        break
    fallback = False
    if phi is None:
        fallback = True
        try:
            found = backtracking_embed(T, G, budget=cfg.budget)
            outcome = "found" if found is not None else "no copy"
        except BudgetExhausted:
            found, outcome = None, "budget exhausted"
        attempts.append({"route": "exact", "outcome": outcome})
        if found is not None:
            phi, route = found.mapping, "exact"
    result = {"tree": canonical_form(T), "k": T.k, "ok": phi is not None, "route": route,
              "fallback": fallback, "attempts": attempts}
    if phi is not None:
        emb = Embedding(dict(phi), route=route)
        verify_embedding(T, G, emb)
        result["mapping"] = {str(t): x for t, x in sorted(phi.items())}
    else:
        result["failure"] = attempts[-1]["outcome"]
    if notes:
        result["notes"] = render(notes)
    return result


def _dispatch_worker(args):
    plan, T, cfg = args
    return dispatch_tree(plan, T, cfg)


def embed_dispatch(G: Graph, k: int, Delta: int, config: Config | None = None, trees=None,
                   workers: int = 1) -> dict:
    """Decide a route for G and run it for every tree in ``trees``
    (default: all trees with k edges and max degree <= Delta).

    Returns a report with the plan, the evaluated checks and one result per
    tree.  d(G) > k - 1 is required in strict runs; lenient runs record the
    failed check and still report per tree.
    """
    cfg = config or Config()
    log = StageLog(cfg.strict)
    log.enter("dispatch")
    G = _fresh(G)
    n = G.n
    if not log.check("d(G) > k - 1", 2 * G.edge_count, ">", (k - 1) * n, hard=False) and cfg.strict:
        raise PreconditionError("d(G) > k - 1", Fraction(2 * G.edge_count, max(n, 1)), k - 1)
    log.check("n >= k", n, ">=", k)
    log.check("k >= delta n", k, ">=", cfg.delta * n)
    trees = list(enumerate_trees(k, Delta)) if trees is None else list(trees)
    plan = _plan(G, k, Delta, cfg, log) if 2 * G.edge_count > (k - 1) * n else DispatchPlan(
        G, G, k, Delta, "exact", summary={"reason": "average degree hypothesis fails"})
    if workers > 1 and len(trees) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_dispatch_worker, [(plan, T, cfg) for T in trees]))
    else:
        results = [dispatch_tree(plan, T, cfg) for T in trees]
    return {
        "n": n, "k": k, "Delta": Delta, "route": plan.route, "plan": render(plan.summary),
        "checks": log.to_dict()["checks"], "results": results,
        "all_ok": all(r["ok"] for r in results),
        "fallbacks": sum(1 for r in results if r["fallback"]),
    }
