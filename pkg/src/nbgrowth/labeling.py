"""Immersions into the bouquet B_r: proper labelings, verification, and words.

A labeling assigns each edge a letter in ``1..r`` and a positive dart
(orientation 0 = as written, 1 = reversed).  It is proper when no vertex has
two outgoing or two incoming darts with the same letter.
"""

from __future__ import annotations

from collections import defaultdict
from itertools import permutations
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .graph import LETTERS, BasedMultigraph, GraphError, natural_key
from .spectral import enumerate_nb_loops, nb_walk_counts


class LabelingError(GraphError):
    pass


class UnlabelableError(LabelingError):
    def __init__(self, vertex: str, deg: int, r: int):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} has degree {deg} > 2r = {2 * r}; no immersion into B_{r}")


class WalkError(ValueError):
    pass


@dataclass(frozen=True)
class Labeling(Mapping):
    """Edge id -> (letter, orientation of the positive dart)."""

    assignment: dict

    def __getitem__(self, e):
        return self.assignment[e]

    def __iter__(self):
        return iter(self.assignment)

    def __len__(self):
        return len(self.assignment)

    def __hash__(self):
        return hash(tuple(sorted(self.assignment.items())))

    def restrict(self, edge_ids: Iterable[str]) -> "Labeling":
        return Labeling({e: self.assignment[e] for e in edge_ids})

    def signed_letter(self, g: BasedMultigraph, d: int) -> tuple[int, int]:
        """(letter, +1/-1) read along dart ``d``."""
        letter, orient = self.assignment[g.edges[d >> 1][0]]
        return letter, (1 if (d & 1) == orient else -1)


# -- verification ------------------------------------------------------------------

def verify_labeling(g: BasedMultigraph, L: Mapping, r: int | None = None):
    """Return ``(ok, violations)``; each violation is ``(vertex, letter, (dart, dart))``."""
    r = g.rank if r is None else r
    missing = [e for e, _, _ in g.edges if e not in L]
    if missing:
        raise LabelingError(f"labeling misses edges {missing[:5]}")
    violations = []
    outs: dict[tuple[str, int], int] = {}
    ins: dict[tuple[str, int], int] = {}
    for i, (e, u, v) in enumerate(g.edges):
        letter, orient = L[e]
        if not 1 <= letter <= r or orient not in (0, 1):
            violations.append((u, letter, (2 * i, 2 * i + 1)))
            continue
        pos = 2 * i + orient
        tail, head = g.dart_tail(pos), g.dart_head(pos)
        for table, w in ((outs, tail), (ins, head)):
            key = (w, letter)
            if key in table:
                violations.append((w, letter, (table[key], pos)))
            else:
                table[key] = pos
    return not violations, violations


# -- construction ---------------------------------------------------------------------

def _euler_orientation(g: BasedMultigraph) -> dict[str, int]:
    """Orient every edge so that |out - in| <= 1 at each vertex.

    Odd-degree vertices of each component are joined to one dummy vertex,
    making all degrees even; orienting along Euler circuits then balances
    in- and out-degree, and dropping dummy edges unbalances by at most one.
    """
    order = sorted(range(len(g.edges)), key=lambda i: natural_key(g.edges[i][0]))
    ends = [(g.edges[i][1], g.edges[i][2]) for i in range(len(g.edges))]
    deg = g.degrees()
    comp: dict[str, int] = {}
    for v in g.vertices:
        if v not in comp:
            cid = len(set(comp.values()))
            for w in g.component_of(v):
                comp[w] = cid
    aux = list(ends)
    n_real = len(ends)
    for v in sorted(g.vertices, key=natural_key):
        if deg[v] % 2:
            aux.append((v, ("dummy", comp[v])))
    aux_order = order + list(range(n_real, len(aux)))

    incident: dict = defaultdict(list)
    for i in aux_order:
        a, b = aux[i]
        incident[a].append(i)
        if b != a:
            incident[b].append(i)
    used = [False] * len(aux)
    ptr: dict = defaultdict(int)
    orient = [0] * len(aux)
    for start_i in aux_order:
        if used[start_i]:
            continue
        start = aux[start_i][0]
        # Hierholzer; orientation follows the direction each edge is first walked
        stack = [start]
        while stack:
            x = stack[-1]
            lst = incident[x]
            while ptr[x] < len(lst) and used[lst[ptr[x]]]:
                ptr[x] += 1
            if ptr[x] == len(lst):
                stack.pop()
                continue
            i = lst[ptr[x]]
            used[i] = True
            a, b = aux[i]
            orient[i] = 0 if a == x else 1
            stack.append(b if a == x else a)
    return {g.edges[i][0]: orient[i] for i in range(n_real)}


def _edge_color_bipartite(edges: Sequence[tuple], r: int) -> list[int]:
    """Proper edge colouring with colours 1..r of a bipartite multigraph of max degree <= r.

    Edges are ``(left, right)``; alternating-path recolouring as in König's theorem.
    """
    at: dict = defaultdict(dict)   # node -> colour -> edge index
    color = [0] * len(edges)
    nodes = lambda i: (("L", edges[i][0]), ("R", edges[i][1]))

    def free(node):
        used = at[node]
        for c in range(1, r + 1):
            if c not in used:
                return c
        raise LabelingError(f"no free colour at {node}; degree exceeds {r}")

    for i in range(len(edges)):
        x, y = nodes(i)
        a = free(x)
        if a not in at[y]:
            color[i] = a
            at[x][a] = i
            at[y][a] = i
            continue
        b = free(y)
        # swap a/b along the alternating path starting at y via colour a
        path = []
        node, c = y, a
        while c in at[node]:
            j = at[node][c]
            path.append(j)
            u, w = nodes(j)
            node = w if node == u else u
            c = b if c == a else a
        for j in path:
            u, w = nodes(j)
            del at[u][color[j]]
            del at[w][color[j]]
        for j in path:
            color[j] = b if color[j] == a else a
            u, w = nodes(j)
            at[u][color[j]] = j
            at[w][color[j]] = j
        color[i] = a
        at[x][a] = i
        at[y][a] = i
    return color


def proper_label(g: BasedMultigraph, r: int | None = None) -> Labeling:
    """Immersion of a finite graph of max degree <= 2r into B_r.

    Euler-circuit orientation gives in/out-degree <= r everywhere; letters are
    then an r-edge-colouring of the out-slot/in-slot bipartite multigraph.
    Ties are broken by ascending edge id, so the output is deterministic.
    """
    r = g.rank if r is None else r
    for v, d in g.degrees().items():
        if d > 2 * r:
            raise UnlabelableError(v, d, r)
    orient = _euler_orientation(g)
    order = sorted(range(len(g.edges)), key=lambda i: natural_key(g.edges[i][0]))
    slots = []
    for i in order:
        e, u, v = g.edges[i]
        tail, head = (u, v) if orient[e] == 0 else (v, u)
        slots.append((tail, head))
    colors = _edge_color_bipartite(slots, r)
    lab = Labeling({g.edges[i][0]: (colors[k], orient[g.edges[i][0]]) for k, i in enumerate(order)})
    ok, violations = verify_labeling(g, lab, r)
    if not ok:
        raise LabelingError(f"internal error: produced improper labeling {violations[:3]}")
    return Labeling({e: lab[e] for e, _, _ in g.edges})


# -- words ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Word:
    """Reduced word in F_r as ((letter, sign), ...), letters 1-based, sign +1/-1."""

    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for (a, s), (b, t) in zip(self.letters, self.letters[1:]):
            if a == b and s == -t:
                raise WalkError(f"word is not reduced at letter {LETTERS[a - 1]}")

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return " ".join(LETTERS[a - 1] if s > 0 else LETTERS[a - 1].upper() for a, s in self.letters)

    def to_json(self) -> list[dict]:
        return [{"letter": LETTERS[a - 1], "sign": "+" if s > 0 else "-"} for a, s in self.letters]

    @classmethod
    def parse(cls, text: str) -> "Word":
        out = []
        for tok in text.split():
            if len(tok) != 1 or tok.lower() not in LETTERS:
                raise ValueError(f"bad letter {tok!r}")
            out.append((LETTERS.index(tok.lower()) + 1, 1 if tok.islower() else -1))
        return cls(tuple(out))


def loop_to_word(g: BasedMultigraph, L: Labeling, loop: Sequence[int]) -> Word:
    """Read the letters along a closed non-backtracking dart path at the basepoint."""
    loop = list(loop)
    if not loop:
        return Word()
    if g.dart_tail(loop[0]) != g.basepoint or g.dart_head(loop[-1]) != g.basepoint:
        raise WalkError("loop does not start and end at the basepoint")
    for i, (d, e) in enumerate(zip(loop, loop[1:])):
        if g.dart_head(d) != g.dart_tail(e):
            raise WalkError(f"broken path between positions {i} and {i + 1}")
        if e == d ^ 1:
            raise WalkError(f"backtracking at position {i + 1}")
    return Word(tuple(L.signed_letter(g, d) for d in loop))


@dataclass
class WordEnumeration:
    counts: list[int]
    words: list[list[Word]]


def iter_subgroup_words(g: BasedMultigraph, L: Labeling, n: int, v: str | None = None) -> Iterator[Word]:
    """Stream the words of closed NB loops of length ``n`` at ``v``."""
    v = g.basepoint if v is None else v
    gb = g if v == g.basepoint else g.with_basepoint(v)
    for loop in enumerate_nb_loops(gb, v, n):
        yield loop_to_word(gb, L, loop)


def enumerate_subgroup_words(g: BasedMultigraph, L: Labeling, v: str | None = None,
                             n_max: int = 8, keep_words: bool = True) -> WordEnumeration:
    """Words of length 0..n_max in pi_1(g, v) as a subgroup of F_r.

    Counts are cross-checked against exact walk counting; distinctness of the
    emitted words is asserted.
    """
    v = g.basepoint if v is None else v
    expected = nb_walk_counts(g, v, n_max)
    counts, words = [], []
    for n in range(n_max + 1):
        seen = set()
        for w in iter_subgroup_words(g, L, n, v):
            if w in seen:
                raise LabelingError(f"two loops read the same word {w}; labeling is not an immersion")
            seen.add(w)
        if len(seen) != expected[n]:
            raise LabelingError(f"length {n}: {len(seen)} words but {expected[n]} loops")
        counts.append(len(seen))
        words.append(sorted(seen, key=lambda w: w.letters) if keep_words else [])
    return WordEnumeration(counts, words)


def extend_labeling(g: BasedMultigraph, base: Mapping, r: int | None = None) -> Labeling:
    """Proper labeling of ``g`` that agrees with ``base`` on the edges it covers.

    Each connected piece of new edges is labeled on its own, then fitted to the
    existing labels by a letter permutation and possibly a global reversal
    (both preserve properness).  Raises if no such fit exists.
    """
    r = g.rank if r is None else r
    old = {e: base[e] for e, _, _ in g.edges if e in base}
    new_ids = [e for e, _, _ in g.edges if e not in old]
    if not new_ids:
        return Labeling(old)
    new_set = set(new_ids)
    touched = {w for e, u, v in g.edges if e in new_set for w in (u, v)}
    new_part = g.subgraph(touched, new_ids, basepoint=next(v for v in g.vertices if v in touched))
    lab = dict(old)
    seen: set[str] = set()
    for v0 in new_part.vertices:
        if v0 in seen:
            continue
        verts = new_part.component_of(v0)
        seen |= verts
        piece = new_part.subgraph(verts, basepoint=v0)
        piece_lab = proper_label(piece, r)
        fitted = _fit_piece(g, lab, piece, piece_lab, r)
        if fitted is None:
            raise LabelingError(f"cannot extend labeling across new component at {v0}")
        lab.update(fitted)
    result = Labeling({e: lab[e] for e, _, _ in g.edges})
    ok, violations = verify_labeling(g, result, r)
    if not ok:
        raise LabelingError(f"internal error: extension is improper {violations[:3]}")
    return result


def _fit_piece(g, lab, piece, piece_lab, r):
    sub = g.subgraph(g.vertices, list(lab) + [e for e, _, _ in piece.edges])
    for perm in permutations(range(1, r + 1)):
        for flip in (0, 1):
            trial = dict(lab)
            for e, (letter, o) in piece_lab.items():
                trial[e] = (perm[letter - 1], o ^ flip)
            if verify_labeling(sub, trial, r)[0]:
                return {e: trial[e] for e, _, _ in piece.edges}
    return None
