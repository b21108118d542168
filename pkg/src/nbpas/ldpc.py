"""Ultra-sparse regular non-binary LDPC codes (variable degree 2).

construct() builds a (2, d_c)-regular Tanner graph PEG-style: every column is
an edge between two check nodes, new edges connect checks that are far apart
in the current graph, and the resulting check graph is simple, which makes
the Tanner girth at least 6.  Non-zero coefficients are drawn uniformly from
GF(q) \\ {0} and redrawn until H has full rank.

from_matrix() accepts an arbitrary dense parity-check matrix for small
hand-built codes; only construct() enforces the ultra-sparse invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .galois import Field, make_field


class CodeError(ValueError):
    pass


@dataclass
class NbLdpcCode:
    field: Field
    n_c: int
    m_c: int
    rows: list                  # per check: list of (column, coefficient)
    systematic_cols: np.ndarray  # k_c info column indices, ascending
    parity_cols: np.ndarray      # m_c parity column indices (pivot order)
    _solve: np.ndarray = field(repr=False, default=None)  # (m_c, k_c) dense

    @property
    def k_c(self):
        return self.n_c - self.m_c

    @property
    def design_rate(self):
        return self.k_c / self.n_c

    def dense_h(self):
        h = np.zeros((self.m_c, self.n_c), dtype=np.int64)
        for j, row in enumerate(self.rows):
            for col, coef in row:
                h[j, col] ^= coef  # accumulate in case of repeated pairs
        return h


def _gf_row_reduce(f, h):
    """Reduced row echelon form over GF(q); returns (rref, pivot_cols)."""
    h = h.copy()
    m, n = h.shape
    pivots = []
    r = 0
    for col in range(n):
        if r == m:
            break
        nz = np.nonzero(h[r:, col])[0]
        if len(nz) == 0:
            continue
        pr = r + nz[0]
        h[[r, pr]] = h[[pr, r]]
        h[r] = f.mul(h[r], f.inv(h[r, col]))
        for rr in range(m):
            if rr != r and h[rr, col]:
                h[rr] = h[rr] ^ f.mul(h[rr, col], h[r])
        pivots.append(col)
        r += 1
    return h, np.array(pivots, dtype=np.int64), r


def _finalize(f, n_c, m_c, rows):
    h = np.zeros((m_c, n_c), dtype=np.int64)
    for j, row in enumerate(rows):
        for col, coef in row:
            h[j, col] ^= coef
    rref, pivots, rank = _gf_row_reduce(f, h)
    if rank < m_c:
        raise CodeError("parity-check matrix is rank deficient")
    parity_cols = pivots
    mask = np.ones(n_c, dtype=bool)
    mask[parity_cols] = False
    systematic_cols = np.nonzero(mask)[0]
    # rows of rref: c[pivot_r] = sum_j rref[r, info_j] * c[info_j]
    solve = rref[:, systematic_cols]
    return NbLdpcCode(
        field=f, n_c=n_c, m_c=m_c, rows=rows,
        systematic_cols=systematic_cols, parity_cols=parity_cols,
        _solve=solve)


def construct(f, n_c, d_c, seed):
    """Build a (d_v=2, d_c)-regular code over f with girth >= 6."""
    if d_c < 3:
        raise CodeError("check degree must be at least 3")
    if (2 * n_c) % d_c != 0:
        raise CodeError(f"2*n_c = {2 * n_c} not divisible by d_c = {d_c}")
    m_c = 2 * n_c // d_c
    if n_c > m_c * (m_c - 1) // 2:
        raise CodeError("too few checks for a simple check graph (girth 6)")
    rng = np.random.default_rng(seed)
    for attempt in range(100):
        pairs = _peg_pairs(n_c, m_c, d_c, rng)
        if pairs is None:
            continue
        for _ in range(100):
            rows = [[] for _ in range(m_c)]
            for col, (a, b) in enumerate(pairs):
                rows[a].append((col, int(rng.integers(1, f.q))))
                rows[b].append((col, int(rng.integers(1, f.q))))
            try:
                return _finalize(f, n_c, m_c, rows)
            except CodeError:
                continue
        raise CodeError("full rank not reached within the retry budget")
    raise CodeError("graph construction failed within the retry budget")


def _peg_pairs(n_c, m_c, d_c, rng):
    """Assign each column a pair of checks, maximizing local girth.

    The first check is a minimum-degree choice under the seeded RNG; the
    second maximizes the BFS distance from the first in the current check
    graph (ties broken by lowest degree, then lowest index).  Returns None
    on a dead end.
    """
    deg = np.zeros(m_c, dtype=np.int64)
    adj = [set() for _ in range(m_c)]
    used_pairs = set()
    pairs = []
    for _ in range(n_c):
        open_checks = np.nonzero(deg < d_c)[0]
        if len(open_checks) < 2:
            return None
        min_deg = deg[open_checks].min()
        cand = open_checks[deg[open_checks] == min_deg]
        a = int(rng.choice(cand))
        dist = _bfs_dist(adj, a, m_c)
        best = None
        for b in open_checks:
            if b == a or (min(a, b), max(a, b)) in used_pairs:
                continue
            key = (dist[b], -deg[b], -int(b))
            if best is None or key > best[0]:
                best = (key, int(b))
        if best is None:
            return None
        b = best[1]
        deg[a] += 1
        deg[b] += 1
        adj[a].add(b)
        adj[b].add(a)
        used_pairs.add((min(a, b), max(a, b)))
        pairs.append((a, b))
    return pairs


def _bfs_dist(adj, start, m_c):
    dist = np.full(m_c, np.inf)
    dist[start] = 0
    frontier = [start]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if dist[v] == np.inf:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    return dist


def from_matrix(f, h):
    """Wrap a dense parity-check matrix (small hand-built codes)."""
    h = np.asarray(h, dtype=np.int64)
    m_c, n_c = h.shape
    rows = [[(int(c), int(h[j, c])) for c in np.nonzero(h[j])[0]]
            for j in range(m_c)]
    return _finalize(f, n_c, m_c, rows)


def encode(code, info):
    """Systematic encoding: info symbols go to systematic_cols verbatim."""
    info = np.asarray(info, dtype=np.int64)
    if info.shape != (code.k_c,):
        raise CodeError(f"expected {code.k_c} info symbols")
    f = code.field
    c = np.zeros(code.n_c, dtype=np.int64)
    c[code.systematic_cols] = info
    # parity[r] = sum_j solve[r, j] * info[j] over GF(q)
    prod = f.mul(code._solve, info[None, :])
    parity = np.bitwise_xor.reduce(prod, axis=1)
    c[code.parity_cols] = parity
    return c


def syndrome(code, word):
    word = np.asarray(word, dtype=np.int64)
    if word.shape != (code.n_c,):
        raise CodeError(f"expected {code.n_c} symbols")
    f = code.field
    s = np.zeros(code.m_c, dtype=np.int64)
    for j, row in enumerate(code.rows):
        acc = 0
        for col, coef in row:
            acc ^= f.mul(coef, int(word[col]))
        s[j] = acc
    return s


# -- textual q-ary alist-style save/load -----------------------------------

def save_code(code, path):
    """Write the code in a textual q-ary alist-style format.

    Line 1: n_c m_c q d_v d_c; line 2: primitive polynomial mask; then one
    line per check row of "col:coeff" pairs; then the systematic and parity
    column permutations.
    """
    d_c = max(len(r) for r in code.rows)
    d_v = max(np.bincount(
        [c for row in code.rows for c, _ in row], minlength=code.n_c))
    with open(path, "w") as fh:
        fh.write(f"{code.n_c} {code.m_c} {code.field.q} {d_v} {d_c}\n")
        fh.write(f"{code.field.prim_poly}\n")
        for row in code.rows:
            fh.write(" ".join(f"{c}:{h}" for c, h in row) + "\n")
        fh.write(" ".join(map(str, code.systematic_cols)) + "\n")
        fh.write(" ".join(map(str, code.parity_cols)) + "\n")


def load_code(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    n_c, m_c, q, _d_v, _d_c = map(int, lines[0].split())
    prim_poly = int(lines[1])
    f = make_field(q.bit_length() - 1, prim_poly)
    rows = []
    for ln in lines[2:2 + m_c]:
        rows.append([(int(a), int(b)) for a, b in
                     (tok.split(":") for tok in ln.split())])
    code = _finalize(f, n_c, m_c, rows)
    sys_cols = np.array(list(map(int, lines[2 + m_c].split())), dtype=np.int64)
    par_cols = np.array(list(map(int, lines[3 + m_c].split())), dtype=np.int64)
    if (not np.array_equal(sys_cols, code.systematic_cols)
            or not np.array_equal(par_cols, code.parity_cols)):
        raise CodeError("stored column permutation disagrees with the matrix")
    return code
