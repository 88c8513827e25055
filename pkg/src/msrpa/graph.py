"""Directed-graph model, circulant generators, and propagation-robustness checks.

Agents are dense integer ids in [0, n). An edge (head, tail) means the head
can send messages to the tail. Graphs are immutable after construction and
safe to share across concurrent runs; neighbor sets are precomputed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class CapacityError(RuntimeError):
    """An exhaustive check would enumerate too many subsets."""


# Hard cap for the definitional (exponential) robustness oracle.
BRUTEFORCE_LIMIT = 20


class Digraph:
    """Immutable simple digraph: no self-loops, no duplicate edges."""

    __slots__ = ("_n", "_edges", "_in", "_out")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise ValueError(f"agent count must be positive, got {n}")
        edge_set = set()
        ins: list[set[int]] = [set() for _ in range(n)]
        outs: list[set[int]] = [set() for _ in range(n)]
        for head, tail in edges:
            if not (0 <= head < n and 0 <= tail < n):
                raise ValueError(f"edge ({head}, {tail}) out of range for n={n}")
            if head == tail:
                raise ValueError(f"self-loop at agent {head}")
            edge_set.add((head, tail))
            outs[head].add(tail)
            ins[tail].add(head)
        self._n = n
        self._edges = frozenset(edge_set)
        self._in = tuple(frozenset(s) for s in ins)
        self._out = tuple(frozenset(s) for s in outs)

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return self._edges

    def agents(self) -> range:
        return range(self._n)

    def _check(self, i: int) -> None:
        if not 0 <= i < self._n:
            raise ValueError(f"agent {i} not in [0, {self._n})")

    def in_neighbors(self, i: int) -> frozenset[int]:
        """Agents that can send to i: {j : (j, i) in E}."""
        self._check(i)
        return self._in[i]

    def out_neighbors(self, i: int) -> frozenset[int]:
        """Agents that i can send to: {k : (i, k) in E}."""
        self._check(i)
        return self._out[i]

    def inclusive_neighbors(self, i: int) -> frozenset[int]:
        """in_neighbors(i) together with i itself."""
        self._check(i)
        return self._in[i] | {i}

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Digraph)
            and self._n == other._n
            and self._edges == other._edges
        )

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        return f"Digraph(n={self._n}, |E|={len(self._edges)})"


def k_circulant(n: int, k: int, undirected: bool = False) -> Digraph:
    """Circulant digraph: each agent i sends to agents i+1 .. i+k (mod n).

    Equivalently, agent i receives edges from the k agents preceding it
    cyclically. The undirected variant is the symmetric closure.
    """
    if n < 2:
        raise ValueError(f"circulant needs n >= 2, got n={n}")
    if not 1 <= k <= n - 1:
        raise ValueError(f"circulant needs 1 <= k <= n-1, got k={k} with n={n}")
    edges = []
    for i in range(n):
        for m in range(1, k + 1):
            j = (i + m) % n
            edges.append((i, j))
            if undirected:
                edges.append((j, i))
    return Digraph(n, edges)


def is_f_total(suspects: Iterable[int], f: int) -> bool:
    """At most f suspects in total."""
    if f < 0:
        raise ValueError("f must be nonnegative")
    return len(set(suspects)) <= f


def is_f_local(g: Digraph, suspects: Iterable[int], f: int) -> bool:
    """At most f suspects in the in-neighborhood of every agent outside the set.

    The graph is static, so the per-timestep quantifier in the definition
    collapses to a single check.
    """
    if f < 0:
        raise ValueError("f must be nonnegative")
    sus = set(suspects)
    for i in sus:
        g._check(i)
    return all(
        len(sus & g.in_neighbors(i)) <= f for i in g.agents() if i not in sus
    )


@dataclass(frozen=True)
class RobustnessCertificate:
    """Outcome of the strong-robustness peeling check.

    peel_order records, per round, the set of agents that became reachable in
    that round. When the check holds, the source set plus all peeled sets
    cover every agent; otherwise `witness` is a nonempty stalled set in which
    every member has fewer than r in-neighbors outside the set.
    """

    holds: bool
    r: int
    peel_order: tuple[tuple[int, frozenset[int]], ...]
    witness: frozenset[int]


def strongly_robust_wrt(g: Digraph, s: Iterable[int], r: int) -> RobustnessCertificate:
    """Certify strong r-robustness with respect to a source set s by peeling.

    Starting from `reached = s`, every agent with at least r in-neighbors
    already reached is absorbed; all simultaneously eligible agents are
    absorbed in the same round, so the fixpoint is order-independent.
    The fixpoint covers every agent iff every nonempty subset of V \\ s
    contains an agent with at least r in-neighbors outside the subset.
    """
    source = frozenset(s)
    if not source:
        raise ValueError("source set must be nonempty")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    for i in source:
        g._check(i)

    reached = set(source)
    remaining = set(g.agents()) - reached
    rounds: list[tuple[int, frozenset[int]]] = []
    round_no = 0
    while remaining:
        round_no += 1
        absorbed = frozenset(
            i for i in remaining if len(g.in_neighbors(i) & reached) >= r
        )
        if not absorbed:
            break
        rounds.append((round_no, absorbed))
        reached |= absorbed
        remaining -= absorbed

    holds = not remaining
    return RobustnessCertificate(
        holds=holds,
        r=r,
        peel_order=tuple(rounds),
        witness=frozenset(remaining),
    )


def strongly_robust_bruteforce(g: Digraph, s: Iterable[int], r: int) -> bool:
    """Definitional oracle: every nonempty C outside s contains an agent with
    at least r in-neighbors outside C. Exponential; guarded by BRUTEFORCE_LIMIT.
    """
    source = frozenset(s)
    if not source:
        raise ValueError("source set must be nonempty")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    rest = sorted(set(g.agents()) - source)
    if len(rest) > BRUTEFORCE_LIMIT:
        raise CapacityError(
            f"{len(rest)} non-source agents exceed brute-force limit {BRUTEFORCE_LIMIT}"
        )
    for mask in range(1, 1 << len(rest)):
        subset = {rest[b] for b in range(len(rest)) if mask >> b & 1}
        if not any(len(g.in_neighbors(i) - subset) >= r for i in subset):
            return False
    return True


def load_edge_list(path: str | Path, n: int | None = None) -> Digraph:
    """Read a digraph from text with one `head tail` pair (0-based) per line.

    Blank lines and lines starting with `#` are skipped. When n is omitted it
    is inferred as max index + 1.
    """
    edges = []
    top = -1
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'head tail', got {raw!r}")
        head, tail = int(parts[0]), int(parts[1])
        edges.append((head, tail))
        top = max(top, head, tail)
    if n is None:
        if top < 0:
            raise ValueError(f"{path}: empty edge list needs an explicit agent count")
        n = top + 1
    return Digraph(n, edges)


def dump_edge_list(g: Digraph, path: str | Path) -> None:
    """Write the edge set as one `head tail` pair per line, sorted."""
    lines = [f"{head} {tail}" for head, tail in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
