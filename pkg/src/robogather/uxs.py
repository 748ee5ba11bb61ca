"""Exploration sequences: application rule, providers and universality checks.

A sequence is applied by a single walker.  At a node of degree ``d`` entered
through port ``e`` (``e = 0`` at the start of a walk) the symbol ``s`` selects
exit port ``(e + s) mod d``.  A sequence is universal for scope ``n`` when, for
every connected port-labeled graph on at most ``n`` nodes and every start node,
the walk visits all nodes.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .enumeration import _graph_from_code, _structure_codes
from .errors import ScopeTooLarge
from .graph import PortGraph

BRUTE_FORCE_MAX_N = 5
VERIFY_MAX_N = 4
PROVENANCES = ("brute-force-verified", "heuristic-corpus-verified")


@dataclass(frozen=True)
class ExplorationSequence:
    symbols: tuple[int, ...]
    scope_n: int
    provenance: str
    seed: int | None = field(default=None, compare=False)

    @property
    def T(self) -> int:
        return len(self.symbols)

    @property
    def memory_bits(self) -> int:
        """Stored size of the sequence in bits."""
        width = max(1, max(self.symbols, default=0).bit_length())
        return self.T * width

    def checksum(self) -> str:
        payload = f"{self.scope_n}|{self.provenance}|{','.join(map(str, self.symbols))}"
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_json(self) -> dict:
        return {
            "scope_n": self.scope_n,
            "length": self.T,
            "symbols": list(self.symbols),
            "provenance": self.provenance,
            "checksum": self.checksum(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExplorationSequence":
        seq = cls(tuple(data["symbols"]), data["scope_n"], data["provenance"])
        if seq.T != data["length"] or seq.checksum() != data["checksum"]:
            raise ValueError(f"corrupt sequence record for scope {data['scope_n']}")
        return seq


def apply_uxs_step(g: PortGraph, node: int, entry_port: int | None, symbol: int):
    """One walk step; returns ``(next_node, arrival_port)``."""
    e = 0 if entry_port is None else entry_port
    return g.ports[node][(e + symbol) % len(g.ports[node])]


def walk(g: PortGraph, symbols, start: int) -> list[int]:
    nodes = [start]
    node, entry = start, None
    for s in symbols:
        node, entry = apply_uxs_step(g, node, entry, s)
        nodes.append(node)
    return nodes


def explores(g: PortGraph, symbols, start: int) -> bool:
    return len(set(walk(g, symbols, start))) == g.n


def verify_on_graphs(seq: ExplorationSequence, graphs) -> bool:
    """True iff the walk covers every node of each given graph from every start."""
    return all(explores(g, seq.symbols, s) for g in graphs for s in range(g.n))


# -- vectorized instance sets ------------------------------------------------


def _labeling_arrays(g: PortGraph, width: int, batch: int = 200_000):
    """Yield ``(nbr, rev)`` arrays of shape ``(B, width, width)`` covering every
    port labeling of ``g`` (node numbering fixed)."""
    n = g.n
    nbrs = [sorted(g.neighbors(v)) for v in range(n)]
    perms = [list(itertools.permutations(x)) for x in nbrs]
    # ptab[v][i, p] neighbor behind port p; pos[v][i, u] port leading to u
    ptab = [np.array(pv, dtype=np.int64).reshape(len(pv), len(nbrs[v])) for v, pv in enumerate(perms)]
    pos = []
    for v, pv in enumerate(perms):
        arr = np.zeros((len(pv), n), dtype=np.int64)
        for i, order in enumerate(pv):
            for p, u in enumerate(order):
                arr[i, u] = p
        pos.append(arr)
    sizes = [len(pv) for pv in perms]
    total = math.prod(sizes)
    for lo in range(0, total, batch):
        flat = np.arange(lo, min(total, lo + batch), dtype=np.int64)
        idx = np.empty((len(flat), n), dtype=np.int64)
        rest = flat
        for v in reversed(range(n)):
            idx[:, v] = rest % sizes[v]
            rest = rest // sizes[v]
        B = len(flat)
        nbr = np.zeros((B, width, width), dtype=np.int64)
        rev = np.zeros((B, width, width), dtype=np.int64)
        for v in range(n):
            for p in range(len(nbrs[v])):
                u = ptab[v][idx[:, v], p]
                nbr[:, v, p] = u
                # reverse port at u for the edge back to v
                rev_vals = np.zeros(B, dtype=np.int64)
                for w in set(nbrs[v]):
                    mask = u == w
                    if mask.any():
                        rev_vals[mask] = pos[w][idx[mask, w], v]
                rev[:, v, p] = rev_vals
        yield nbr, rev


def _covers_all(symbols, nbr, rev, deg, size) -> np.ndarray:
    """Boolean per (labeling, start): does the walk visit every node?"""
    B, width = deg.shape
    starts = np.arange(width)
    node = np.tile(starts, (B, 1))
    valid = starts[None, :] < size[:, None]
    entry = np.zeros_like(node)
    vis = np.left_shift(1, node)
    rows = np.arange(B)[:, None]
    for s in symbols:
        d = deg[rows, node]
        p = (entry + s) % d
        nxt = nbr[rows, node, p]
        entry = rev[rows, node, p]
        node = nxt
        vis |= np.left_shift(1, node)
    full = (np.left_shift(1, size) - 1)[:, None]
    return (vis == full) | ~valid


def verify_universal(seq: ExplorationSequence | list | tuple, n: int, allow_long: bool = False) -> bool:
    """Exhaustive universality check over all port labelings of all connected
    graphs with at most ``n`` nodes and all start nodes.

    ``n = 5`` enumerates about ten million labelings and is only run with
    ``allow_long=True``.
    """
    symbols = seq.symbols if isinstance(seq, ExplorationSequence) else tuple(seq)
    limit = BRUTE_FORCE_MAX_N if allow_long else VERIFY_MAX_N
    if n > limit:
        raise ScopeTooLarge(f"exhaustive verification supports n <= {limit}")
    for k in range(2, n + 1):
        for code in _structure_codes(k):
            g = _graph_from_code(k, code)
            deg1 = np.array(g.degrees, dtype=np.int64)
            for nbr, rev in _labeling_arrays(g, k):
                B = nbr.shape[0]
                deg = np.broadcast_to(deg1, (B, k))
                size = np.full(B, k, dtype=np.int64)
                if not _covers_all(symbols, nbr, rev, deg, size).all():
                    return False
    return True


# -- brute-force search -------------------------------------------------------


def _port_canonical(nbr_rows, rev_rows, n) -> tuple:
    best = None
    for s in range(n):
        idx = {s: 0}
        order = [s]
        i = 0
        while i < len(order):
            v = order[i]
            i += 1
            for u in nbr_rows[v]:
                if u not in idx:
                    idx[u] = len(order)
                    order.append(u)
        code = tuple(
            tuple((idx[u], q) for u, q in zip(nbr_rows[v], rev_rows[v])) for v in order
        )
        if best is None or code < best:
            best = code
    return best


def _instance_arrays(n: int):
    """Distinct (up to port-preserving isomorphism) port-labeled graphs with
    2..n nodes, padded to width ``n``; one instance per (graph, start)."""
    seen = {}
    for k in range(2, n + 1):
        for code in _structure_codes(k):
            g = _graph_from_code(k, code)
            degs = g.degrees
            for nbr, rev in _labeling_arrays(g, k):
                for b in range(nbr.shape[0]):
                    nrows = [tuple(nbr[b, v, : degs[v]]) for v in range(k)]
                    rrows = [tuple(rev[b, v, : degs[v]]) for v in range(k)]
                    key = (k, _port_canonical(nrows, rrows, k))
                    if key not in seen:
                        seen[key] = (k, nrows, rrows)
    graphs = list(seen.values())
    G = len(graphs)
    nbr = np.zeros((G, n, n), dtype=np.int64)
    rev = np.zeros((G, n, n), dtype=np.int64)
    deg = np.ones((G, n), dtype=np.int64)
    size = np.zeros(G, dtype=np.int64)
    for i, (k, nrows, rrows) in enumerate(graphs):
        size[i] = k
        for v in range(k):
            deg[i, v] = len(nrows[v])
            nbr[i, v, : len(nrows[v])] = nrows[v]
            rev[i, v, : len(rrows[v])] = rrows[v]
    gi = np.repeat(np.arange(G), size)
    start = np.concatenate([np.arange(k) for k in size])
    return nbr, rev, deg, size, gi, start


def _popcount(x: np.ndarray) -> np.ndarray:
    c = np.zeros_like(x)
    while x.any():
        c += x & 1
        x = x >> 1
    return c


def search_shortest(n: int, max_length: int = 64) -> tuple[int, ...]:
    """Iterative deepening over sequence length with symbols ``0..n-1``.

    The joint state of all (graph, start) instances is tracked step by step;
    finished instances are dropped, duplicate instance states merged, and a
    branch is cut when some instance has more unvisited nodes than steps left
    or when the same joint state already failed with as many steps left.
    """
    if n > BRUTE_FORCE_MAX_N:
        raise ScopeTooLarge(f"brute-force search supports n <= {BRUTE_FORCE_MAX_N}")
    if n < 2:
        return ()
    nbr, rev, deg, size, gi, start = _instance_arrays(n)
    full_of = np.left_shift(1, size) - 1
    state = np.stack([gi, start, np.zeros_like(start), np.left_shift(1, start)], axis=1)

    for length in range(max_length + 1):
        failed: set = set()

        def rec(state, remaining, prefix):
            g, node, vis = state[:, 0], state[:, 1], state[:, 3]
            alive = vis != full_of[g]
            if not alive.any():
                return prefix
            if remaining == 0:
                return None
            state = np.unique(state[alive], axis=0)
            g, node, entry, vis = state.T
            if _popcount(full_of[g] ^ vis).max() > remaining:
                return None
            key = (remaining, state.tobytes())
            if key in failed:
                return None
            d = deg[g, node]
            for s in range(n):
                p = (entry + s) % d
                nxt = nbr[g, node, p]
                new = np.stack([g, nxt, rev[g, node, p], vis | np.left_shift(1, nxt)], axis=1)
                found = rec(new, remaining - 1, prefix + (s,))
                if found is not None:
                    return found
            failed.add(key)
            return None

        found = rec(state, length, ())
        if found is not None:
            return found
    raise RuntimeError(f"no universal sequence of length <= {max_length} for n={n}")


# -- providers ------------------------------------------------------------------

_PACKAGED = Path(__file__).with_name("data") / "uxs_cache.json"


def _cache_path() -> Path:
    root = os.environ.get("ROBOGATHER_CACHE") or Path.home() / ".cache" / "robogather"
    return Path(root) / "uxs_cache.json"


def _load_cache(path: Path) -> dict[int, ExplorationSequence]:
    if not path.exists():
        return {}
    with path.open() as fh:
        records = json.load(fh)
    return {r["scope_n"]: ExplorationSequence.from_json(r) for r in records}


def _store(seq: ExplorationSequence) -> None:
    path = _cache_path()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        cache = _load_cache(path)
        cache[seq.scope_n] = seq
        with path.open("w") as fh:
            json.dump([cache[k].to_json() for k in sorted(cache)], fh, indent=1)
    except OSError:
        pass


_memo: dict[int, ExplorationSequence] = {}


def brute_force_sequence(n: int) -> ExplorationSequence:
    if n > BRUTE_FORCE_MAX_N:
        raise ScopeTooLarge(f"brute-force provider supports n <= {BRUTE_FORCE_MAX_N}")
    if n in _memo:
        return _memo[n]
    for path in (_PACKAGED, _cache_path()):
        cached = _load_cache(path).get(n)
        if cached is not None:
            _memo[n] = cached
            return cached
    seq = ExplorationSequence(search_shortest(n), n, "brute-force-verified")
    if n <= VERIFY_MAX_N and not verify_universal(seq, n):
        raise AssertionError(f"search returned a non-universal sequence for n={n}")
    _memo[n] = seq
    _store(seq)
    return seq


def heuristic_length(n: int) -> int:
    return math.ceil(8 * n**3 * math.log2(n))


_GAMMA = np.uint64(0x9E3779B97F4A7C15)


def _splitmix64(count: int, seed: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GAMMA * np.arange(1, count + 1, dtype=np.uint64)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def heuristic_sequence(n: int, seed: int = 0) -> ExplorationSequence:
    """SplitMix64 stream keyed by ``(n, seed)``, reduced mod ``n``.

    Not certified universal: check it with :func:`verify_on_graphs` on the
    graphs it will be used on.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    key = (n << 32) ^ (seed & 0xFFFFFFFF)
    raw = _splitmix64(heuristic_length(n), key)
    symbols = tuple(int(x) for x in raw % np.uint64(n))
    return ExplorationSequence(symbols, n, "heuristic-corpus-verified", seed=seed)


def provide_sequence(n: int, provider: str = "brute-force", seed: int = 0) -> ExplorationSequence:
    if provider == "brute-force":
        return brute_force_sequence(n)
    if provider == "heuristic":
        return heuristic_sequence(n, seed)
    if provider == "auto":
        return brute_force_sequence(n) if n <= VERIFY_MAX_N else heuristic_sequence(n, seed)
    raise ValueError(f"unknown provider {provider!r}")
