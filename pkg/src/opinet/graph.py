"""Community graphs: planted-partition generation and Laplacian diagnostics.

The generator follows the usual planted-partition recipe: every node draws a
target degree near the requested mean, declares a share of its stubs
intra-community according to the mixing parameter mu, and the stub pools are
randomly matched into simple undirected edges.  Realized degrees track the
targets approximately; self loops and duplicate pairs are rejected during
matching, leftover stubs are dropped after a few repair rounds.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SimulationError

# Dense spectral diagnostics are a desk-scale tool; refuse bigger graphs.
LAPLACIAN_NODE_CAP = 2048

_MATCH_ROUNDS = 8


@dataclass
class GraphConfig:
    """Parameters for generate_community_graph."""

    n_nodes: int
    n_groups: int = 1
    proportions: tuple = ()
    mean_degree: float = 10.0
    mixing_mu: float = 0.1
    seed: int = 0

    def community_sizes(self):
        """Apportion n_nodes across communities by largest remainder."""
        k = self.n_groups
        props = np.asarray(self.proportions if self.proportions else [1.0 / k] * k,
                           dtype=float)
        props = props / props.sum()
        quota = props * self.n_nodes
        sizes = np.floor(quota).astype(np.int64)
        short = self.n_nodes - int(sizes.sum())
        order = np.argsort(-(quota - sizes), kind="stable")
        sizes[order[:short]] += 1
        return [int(s) for s in sizes]

    def validate(self):
        if self.n_nodes < 2:
            raise ConfigError("graph.n_nodes: need at least two nodes")
        if self.n_groups < 1:
            raise ConfigError("graph.n_groups: need at least one community")
        if self.n_groups > self.n_nodes:
            raise ConfigError("graph.n_groups: more communities than nodes")
        if not (0.0 <= self.mixing_mu <= 1.0):
            raise ConfigError("graph.mixing_mu: must lie in [0, 1]")
        if not np.isfinite(self.mean_degree) or self.mean_degree <= 0:
            raise ConfigError("graph.mean_degree: must be positive and finite")
        if self.mean_degree >= self.n_nodes - 1:
            raise ConfigError("graph.mean_degree: must be below n_nodes - 1")
        if self.proportions:
            if len(self.proportions) != self.n_groups:
                raise ConfigError("graph.proportions: length must equal n_groups")
            if min(self.proportions) <= 0:
                raise ConfigError("graph.proportions: must be positive")
        sizes = self.community_sizes()
        if min(sizes) == 0:
            raise ConfigError("graph.proportions: a community came out empty")
        # a community must be able to host its members' intra-community stubs
        intra_target = (1.0 - self.mixing_mu) * self.mean_degree
        if intra_target >= min(sizes):
            raise ConfigError(
                "graph: community of size %d cannot host intra-community degree "
                "target %.3g" % (min(sizes), intra_target))


@dataclass(eq=False)
class CommunityGraph:
    """Simple undirected graph with a community label per node.

    edges is an (m, 2) int array with i < j on each row, rows unique and
    lexicographically sorted.  community holds labels in 1..n_groups.
    Adjacency is precomputed in CSR form with neighbor lists sorted
    ascending; that fixed ordering pins the accumulation order used by the
    dynamics, which keeps runs bit-reproducible.
    """

    n_nodes: int
    edges: np.ndarray
    community: np.ndarray
    degrees: np.ndarray = field(init=False, repr=False)
    adj_offsets: np.ndarray = field(init=False, repr=False)
    adj_indices: np.ndarray = field(init=False, repr=False)
    adj_heads: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n_nodes)
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.edges = e
        self.community = np.asarray(self.community, dtype=np.int64)
        if self.community.shape != (n,):
            raise ConfigError("graph: community labels must cover every node")
        if self.community.size and self.community.min() < 1:
            raise ConfigError("graph: community labels start at 1")
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise ConfigError("graph: edge endpoint out of range")
            if np.any(e[:, 0] >= e[:, 1]):
                raise ConfigError("graph: edges must satisfy i < j")
            order = np.lexsort((e[:, 1], e[:, 0]))
            if not np.array_equal(order, np.arange(e.shape[0])):
                raise ConfigError("graph: edges must be lexicographically sorted")
            if np.any(np.all(e[1:] == e[:-1], axis=1)):
                raise ConfigError("graph: duplicate edge")
        heads = np.concatenate([e[:, 0], e[:, 1]])
        tails = np.concatenate([e[:, 1], e[:, 0]])
        deg = np.bincount(heads, minlength=n).astype(np.int64)
        order = np.lexsort((tails, heads))
        self.adj_heads = heads[order]
        self.adj_indices = tails[order]
        self.adj_offsets = np.concatenate([[0], np.cumsum(deg)]).astype(np.int64)
        self.degrees = deg

    @property
    def n_groups(self):
        return int(self.community.max()) if self.community.size else 0

    @property
    def n_edges(self):
        return int(self.edges.shape[0])

    def neighbors(self, i):
        return self.adj_indices[self.adj_offsets[i]:self.adj_offsets[i + 1]]


def graph_from_pairs(n_nodes, pairs, community=None):
    """Build a CommunityGraph from arbitrary (i, j) pairs, canonicalizing."""
    seen = set()
    for i, j in pairs:
        i, j = int(i), int(j)
        if i == j:
            raise ConfigError("graph: self loop (%d, %d)" % (i, j))
        seen.add((i, j) if i < j else (j, i))
    e = np.asarray(sorted(seen), dtype=np.int64).reshape(-1, 2)
    if community is None:
        community = np.ones(n_nodes, dtype=np.int64)
    return CommunityGraph(n_nodes, e, community)


def _greedy_match(stubs, rng, ok_pair, edge_set, rounds=_MATCH_ROUNDS):
    # Random pairing with rejection; rejected stubs get reshuffled a few
    # times, whatever is left after the last round is dropped.
    pool = np.asarray(stubs, dtype=np.int64)
    for _ in range(rounds):
        if pool.size < 2:
            break
        rng.shuffle(pool)
        work = pool[:-1] if pool.size % 2 else pool
        leftover = [int(pool[-1])] if pool.size % 2 else []
        for u, v in zip(work[0::2], work[1::2]):
            u, v = int(u), int(v)
            key = (u, v) if u < v else (v, u)
            if u == v or key in edge_set or not ok_pair(u, v):
                leftover.extend((u, v))
                continue
            edge_set.add(key)
        pool = np.asarray(leftover, dtype=np.int64)


def generate_community_graph(config):
    """Planted-partition generator; deterministic given config.seed."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n_nodes
    sizes = config.community_sizes()
    community = np.repeat(np.arange(1, config.n_groups + 1), sizes)

    target = rng.poisson(config.mean_degree, size=n)
    np.clip(target, 1, n - 1, out=target)
    n_intra = rng.binomial(target, 1.0 - config.mixing_mu)
    n_inter = target - n_intra

    edge_set = set()
    for c in range(1, config.n_groups + 1):
        members = np.flatnonzero(community == c)
        stubs = np.repeat(members, n_intra[members])
        _greedy_match(stubs, rng, lambda u, v: True, edge_set)

    inter_stubs = np.repeat(np.arange(n), n_inter)
    _greedy_match(inter_stubs, rng,
                  lambda u, v: community[u] != community[v], edge_set)

    e = np.asarray(sorted(edge_set), dtype=np.int64).reshape(-1, 2)
    return CommunityGraph(n, e, community)


def _component_labels(graph):
    n = graph.n_nodes
    label = np.full(n, -1, dtype=np.int64)
    count = 0
    for start in range(n):
        if label[start] >= 0:
            continue
        stack = [start]
        label[start] = count
        while stack:
            u = stack.pop()
            for v in graph.neighbors(u):
                v = int(v)
                if label[v] < 0:
                    label[v] = count
                    stack.append(v)
        count += 1
    return label, count


def is_connected(graph):
    return _component_labels(graph)[1] == 1


def ensure_connected(graph, rng=None):
    """Bridge every stray component into the main one (one edge each).

    Idempotent on connected input.  The default rng is seeded from the node
    count so the operation stays deterministic when no generator is passed.
    """
    label, count = _component_labels(graph)
    if count <= 1:
        return graph
    if rng is None:
        rng = np.random.default_rng(graph.n_nodes)
    sizes = np.bincount(label)
    main = int(np.argmax(sizes))
    pool = np.flatnonzero(label == main)
    pairs = [tuple(row) for row in graph.edges]
    for c in range(count):
        if c == main:
            continue
        members = np.flatnonzero(label == c)
        u = int(members[rng.integers(members.size)])
        v = int(pool[rng.integers(pool.size)])
        pairs.append((u, v))
    return graph_from_pairs(graph.n_nodes, pairs, graph.community)


def measured_mixing(graph):
    """Fraction of edges whose endpoints sit in different communities."""
    if graph.n_edges == 0:
        raise ConfigError("graph: mixing undefined without edges")
    c = graph.community
    inter = c[graph.edges[:, 0]] != c[graph.edges[:, 1]]
    return float(np.mean(inter))


def laplacian(graph, max_nodes=LAPLACIAN_NODE_CAP):
    """Dense combinatorial Laplacian: diag(degrees) minus adjacency."""
    n = graph.n_nodes
    if n > max_nodes:
        raise ConfigError(
            "graph: %d nodes exceeds the dense Laplacian cap %d" % (n, max_nodes))
    lap = np.zeros((n, n))
    e = graph.edges
    lap[e[:, 0], e[:, 1]] = -1.0
    lap[e[:, 1], e[:, 0]] = -1.0
    lap[np.arange(n), np.arange(n)] = graph.degrees
    return lap


def spectral_gap(graph):
    """Smallest nonzero Laplacian eigenvalue (0 for disconnected graphs).

    Dense symmetric eigensolve; the kernel is checked explicitly: the
    constant vector must be annihilated and the bottom eigenvalue must
    vanish to relative tolerance 1e-10.
    """
    lap = laplacian(graph)
    n = graph.n_nodes
    try:
        vals = np.linalg.eigvalsh(lap)
    except np.linalg.LinAlgError as exc:
        raise SimulationError("graph: eigensolver did not converge: %s" % exc)
    scale = max(1.0, float(vals[-1]))
    if abs(float(vals[0])) > 1e-10 * scale:
        raise SimulationError("graph: bottom Laplacian eigenvalue is not 0")
    resid = np.max(np.abs(lap @ np.ones(n)))
    if resid > 1e-10 * scale:
        raise SimulationError("graph: constant vector is not in the kernel")
    return float(vals[1])


def save_graph(graph, edges_path, labels_path):
    """Edge list as 'i<TAB>j' (0-based, i<j); labels as 'node<TAB>label'."""
    with open(edges_path, "w") as fh:
        for i, j in graph.edges:
            fh.write("%d\t%d\n" % (i, j))
    with open(labels_path, "w") as fh:
        for i, c in enumerate(graph.community):
            fh.write("%d\t%d\n" % (i, c))


def load_graph(edges_path, labels_path):
    nodes = []
    labels = []
    with open(labels_path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split("\t")
            nodes.append(int(a))
            labels.append(int(b))
    n = len(nodes)
    if sorted(nodes) != list(range(n)):
        raise ConfigError("graph file: node ids must be 0..N-1")
    community = np.empty(n, dtype=np.int64)
    community[np.asarray(nodes)] = labels
    pairs = []
    with open(edges_path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split("\t")
            pairs.append((int(a), int(b)))
    return graph_from_pairs(n, pairs, community)
