"""Regular/superregular pair checkers, slicing arithmetic, subcluster
refinement, reduced graphs, density inheritance, and a best-effort partitioner.

Exact regularity is decided exhaustively (sides capped at 12): for a fixed
witness side Y, the extremal X of every size is a prefix of the vertices
sorted by degree into Y, so one subset scan per side settles all pairs.
Heuristic mode searches degree/codegree outliers and random subsets; it may
miss violations but every witness it reports has been rechecked exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .density import DensityParams, SizeLimitExceeded, is_locally_dense_exact
from .graphs import DenseGraph, bits, mask_of


EXACT_SIDE_THRESHOLD = 12


class EmptySide(ValueError):
    pass


class InsufficientVertices(ValueError):
    """A cluster lost more vertices than the refinement allows."""

    def __init__(self, cluster: int, against: int, failed: int, allowed: float):
        self.cluster = cluster
        self.against = against
        self.failed = failed
        self.allowed = allowed
        super().__init__(
            f"cluster {cluster}: {failed} vertices fail the degree test toward "
            f"cluster {against} (allowed {allowed:.2f})"
        )


def pair_density(G: DenseGraph, A: list[int], B: list[int]) -> float:
    """e_G(A,B) / (|A||B|) for disjoint nonempty A, B."""
    if not A or not B:
        raise EmptySide("pair density needs nonempty sides")
    am, bm = mask_of(A), mask_of(B)
    if am & bm:
        raise ValueError("sides must be disjoint")
    return G.edges_between(am, bm) / (len(A) * len(B))


@dataclass(frozen=True)
class RegularityVerdict:
    regular: bool
    density: float
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    deviation: float = 0.0

    def __bool__(self) -> bool:
        return self.regular


def _extremal_x_for_y(
    G: DenseGraph, A: list[int], ymask: int, min_x: int, d_ab: float, eps: float
) -> tuple[tuple[int, ...], float] | None:
    """Given Y, test every X ⊆ A with |X| >= min_x via sorted prefix sums."""
    ysize = ymask.bit_count()
    degs = sorted(((G.rows[v] & ymask).bit_count(), v) for v in A)
    # minimal densities: prefixes of ascending order
    prefix = 0
    chosen: list[int] = []
    best = None
    for k, (c, v) in enumerate(degs, start=1):
        prefix += c
        chosen.append(v)
        if k >= min_x:
            dev = d_ab - prefix / (k * ysize)
            if dev > eps:
                return tuple(sorted(chosen)), dev
    # maximal densities: prefixes of descending order
    prefix = 0
    chosen = []
    for k, (c, v) in enumerate(reversed(degs), start=1):
        prefix += c
        chosen.append(v)
        if k >= min_x:
            dev = prefix / (k * ysize) - d_ab
            if dev > eps:
                return tuple(sorted(chosen)), dev
    return None


def is_eps_regular(
    G: DenseGraph,
    A: list[int],
    B: list[int],
    eps: float,
    mode: str = "exact",
    trials: int = 200,
    seed: int = 0,
) -> RegularityVerdict:
    """Check |d(A,B) - d(X,Y)| <= eps over X ⊆ A, Y ⊆ B with the size bounds.

    Exact mode is exhaustive for sides up to 12.  Heuristic mode tries
    degree-outlier sets, joint-neighbourhood slices and random subsets; a
    "regular" answer may be wrong, an "irregular" one never is.
    """
    if not A or not B:
        raise EmptySide("regularity needs nonempty sides")
    d_ab = pair_density(G, A, B)
    min_x = max(1, math.ceil(eps * len(A)))
    min_y = max(1, math.ceil(eps * len(B)))

    def recheck(X: tuple[int, ...], Y: tuple[int, ...]) -> RegularityVerdict | None:
        if len(X) < min_x or len(Y) < min_y:
            return None
        dxy = G.edges_between(mask_of(X), mask_of(Y)) / (len(X) * len(Y))
        dev = abs(d_ab - dxy)
        if dev > eps:
            return RegularityVerdict(False, d_ab, (tuple(X), tuple(Y)), dev)
        return None

    if mode == "exact":
        if len(A) > EXACT_SIDE_THRESHOLD or len(B) > EXACT_SIDE_THRESHOLD:
            raise SizeLimitExceeded(
                f"sides ({len(A)},{len(B)}) exceed exact cap {EXACT_SIDE_THRESHOLD}"
            )
        # scan Y ⊆ B and close the X side analytically; then the mirror image
        for side_a, side_b in ((A, B), (B, A)):
            min_xa = max(1, math.ceil(eps * len(side_a)))
            min_yb = max(1, math.ceil(eps * len(side_b)))
            bl = list(side_b)
            for ym in range(1, 1 << len(bl)):
                if ym.bit_count() < min_yb:
                    continue
                ymask = 0
                for i in bits(ym):
                    ymask |= 1 << bl[i]
                hit = _extremal_x_for_y(G, side_a, ymask, min_xa, d_ab, eps)
                if hit is not None:
                    X, dev = hit
                    Y = tuple(sorted(bits(ymask)))
                    if side_a is A:
                        return RegularityVerdict(False, d_ab, (X, Y), dev)
                    return RegularityVerdict(False, d_ab, (Y, X), dev)
        return RegularityVerdict(True, d_ab)

    if mode == "heuristic":
        rng = random.Random(seed)
        bmask = mask_of(B)
        amask = mask_of(A)

        def outlier_sets(side: list[int], other_mask: int, min_k: int):
            degs = sorted(
                ((G.rows[v] & other_mask).bit_count(), v) for v in side
            )
            order = [v for _, v in degs]
            for k in range(min_k, len(side) + 1):
                yield tuple(order[:k])
                yield tuple(order[-k:])

        # degree outliers on each side against the full other side
        for X in outlier_sets(A, bmask, min_x):
            hit = recheck(X, tuple(B))
            if hit:
                return hit
        for Y in outlier_sets(B, amask, min_y):
            hit = recheck(tuple(A), Y)
            if hit:
                return hit
        # neighbourhood/codegree slices: Y = N(a) ∩ B and its complement
        sample_a = A if len(A) <= 24 else rng.sample(A, 24)
        for a in sample_a:
            for ym in (G.rows[a] & bmask, ~G.rows[a] & bmask):
                Y = tuple(bits(ym))
                if len(Y) < min_y:
                    continue
                for X in outlier_sets(A, ym, min_x):
                    hit = recheck(X, Y)
                    if hit:
                        return hit
        # random subsets
        for _ in range(trials):
            X = tuple(v for v in A if rng.random() < 0.5)
            Y = tuple(v for v in B if rng.random() < 0.5)
            if len(X) >= min_x and len(Y) >= min_y:
                hit = recheck(X, Y)
                if hit:
                    return hit
        return RegularityVerdict(True, d_ab)

    raise ValueError(f"unknown mode {mode!r}")


def is_superregular(
    G: DenseGraph,
    A: list[int],
    B: list[int],
    eps: float,
    delta: float,
    mode: str = "exact",
    seed: int = 0,
) -> RegularityVerdict:
    """(eps,delta)-regular plus per-vertex minimum degree into the other side."""
    bm, am = mask_of(B), mask_of(A)
    for a in A:
        if (G.rows[a] & bm).bit_count() < delta * len(B):
            return RegularityVerdict(
                False, pair_density(G, A, B), ((a,), tuple(B)), 0.0
            )
    for b in B:
        if (G.rows[b] & am).bit_count() < delta * len(A):
            return RegularityVerdict(
                False, pair_density(G, A, B), (tuple(A), (b,)), 0.0
            )
    verdict = is_eps_regular(G, A, B, eps, mode=mode, seed=seed)
    if not verdict:
        return verdict
    if verdict.density < delta:
        return RegularityVerdict(False, verdict.density, (tuple(A), tuple(B)), 0.0)
    return verdict


def slice_robustness_expected(
    eps: float, delta: float, alpha: float
) -> tuple[float, float]:
    """Parameters surviving a perturbation of relative size alpha:
    (eps + 6*sqrt(alpha), delta - 4*alpha)."""
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0,1)")
    return eps + 6 * math.sqrt(alpha), delta - 4 * alpha


# -- cluster partitions and reduced graphs ---------------------------------


@dataclass(frozen=True)
class ClusterPartition:
    """Exceptional set V0 plus equal-sized disjoint clusters covering V(G)."""

    exceptional: tuple[int, ...]
    clusters: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sizes = {len(c) for c in self.clusters}
        if len(sizes) > 1:
            raise ValueError(f"clusters must be equal-sized, got sizes {sorted(sizes)}")
        seen: set[int] = set()
        for part in (self.exceptional, *self.clusters):
            for v in part:
                if v in seen:
                    raise ValueError(f"vertex {v} appears twice in the partition")
                seen.add(v)

    @property
    def L(self) -> int:
        return len(self.clusters)

    @property
    def m(self) -> int:
        return len(self.clusters[0]) if self.clusters else 0

    def covered(self) -> int:
        return len(self.exceptional) + self.L * self.m

    def to_json_dict(self) -> dict:
        return {
            "exceptional": list(self.exceptional),
            "clusters": [list(c) for c in self.clusters],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ClusterPartition":
        return cls(
            tuple(d["exceptional"]), tuple(tuple(c) for c in d["clusters"])
        )


@dataclass(frozen=True)
class ReducedGraph:
    """Cluster-level graph; edges annotate (eps,delta)-regular pairs."""

    base: DenseGraph
    pair_params: dict[tuple[int, int], tuple[float, float]] = field(default_factory=dict)
    superregular_edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        for (u, v) in self.superregular_edges:
            if not self.base.has_edge(u, v):
                raise ValueError(f"superregular pair ({u},{v}) not an edge of R")


@dataclass
class InheritanceReport:
    density_pass: bool
    density_witness: tuple[int, ...] | None
    min_degree_pass: bool
    min_degree: int
    min_degree_required: float

    def all_pass(self) -> bool:
        return self.density_pass and self.min_degree_pass


def inheritance_check(
    G: DenseGraph,
    partition: ClusterPartition,
    R: ReducedGraph,
    rho: float,
    d: float,
    delta: float,
    eta: float,
) -> InheritanceReport:
    """Check that R is (max{3rho,3delta}, d)-dense with delta(R) >= (1/2+eta/2)L."""
    L = R.base.n
    rho_star = max(3 * rho, 3 * delta)
    verdict = is_locally_dense_exact(R.base, DensityParams(rho_star, d))
    min_deg = R.base.min_degree()
    required = (0.5 + eta / 2) * L
    return InheritanceReport(
        density_pass=bool(verdict),
        density_witness=verdict.witness,
        min_degree_pass=min_deg >= required,
        min_degree=min_deg,
        min_degree_required=required,
    )


def refine_to_superregular(
    G: DenseGraph,
    clusters: list[list[int]],
    R: ReducedGraph,
    eps: float,
    delta: float,
    verify: bool = True,
    seed: int = 0,
) -> list[list[int]]:
    """Shrink each cluster to ceil((1-sqrt(eps))*m) so R-neighbour pairs become
    superregular at (4*sqrt(eps), delta/2).

    A vertex is discarded when its degree into some R-neighbour cluster falls
    below (delta-eps)*m; more than sqrt(eps)*m failures in one cluster means
    the regularity hypothesis was violated and is reported.  Survivors are
    trimmed deterministically (highest ids first) to the exact target size.
    """
    m = len(clusters[0])
    if any(len(c) != m for c in clusters):
        raise ValueError("clusters must be equal-sized")
    target = math.ceil((1 - math.sqrt(eps)) * m)
    allowed = math.sqrt(eps) * m
    masks = [mask_of(c) for c in clusters]
    refined: list[list[int]] = []
    for i, cluster in enumerate(clusters):
        bad: set[int] = set()
        for j in range(len(clusters)):
            if not R.base.has_edge(i, j):
                continue
            thresh = (delta - eps) * m
            failing = [v for v in cluster if (G.rows[v] & masks[j]).bit_count() < thresh]
            if len(failing) > allowed:
                raise InsufficientVertices(i, j, len(failing), allowed)
            bad.update(failing)
        if len(bad) > m - target:
            # hypothesis violated jointly even though each pair was fine
            worst = max(
                (j for j in range(len(clusters)) if R.base.has_edge(i, j)),
                key=lambda j: sum(
                    1 for v in cluster if (G.rows[v] & masks[j]).bit_count() < (delta - eps) * m
                ),
                default=i,
            )
            raise InsufficientVertices(i, worst, len(bad), m - target)
        survivors = [v for v in cluster if v not in bad]
        refined.append(sorted(survivors)[:target])
    if verify:
        for i in range(len(refined)):
            for j in range(i + 1, len(refined)):
                if not R.base.has_edge(i, j):
                    continue
                verdict = is_superregular(
                    G,
                    refined[i],
                    refined[j],
                    4 * math.sqrt(eps),
                    delta / 2,
                    mode="heuristic",
                    seed=seed,
                )
                if not verdict:
                    raise InsufficientVertices(i, j, -1, allowed)
    return refined


# -- best-effort degree-form partitioner ------------------------------------


class BudgetExhausted(RuntimeError):
    pass


@dataclass
class PartitionReport:
    """Measured (not guaranteed) properties of an emitted partition."""

    L: int
    m: int
    exceptional_size: int
    pair_verdicts: dict[tuple[int, int], str] = field(default_factory=dict)
    degree_loss_histogram: dict[int, int] = field(default_factory=dict)
    rounds: int = 0


def heuristic_degree_form_partition(
    G: DenseGraph,
    eps: float,
    delta: float,
    L_min: int,
    seed: int = 0,
    max_rounds: int = 3,
    max_L: int | None = None,
    heuristic_trials: int = 60,
) -> tuple[ClusterPartition, DenseGraph, ReducedGraph, PartitionReport]:
    """Iterative-refinement stand-in for the degree-form partition.

    Starts from a seeded random equitable partition with L in
    [L_min, 8*L_min], splits clusters along heuristic irregularity witnesses
    for a bounded number of rounds, then emits the pure subgraph (edges of
    regular pairs with density >= delta, intra-cluster edges dropped,
    exceptional-vertex edges kept) and the reduced graph.  Equal cluster
    sizes, the exceptional bound and missing intra-cluster pure edges are
    enforced structurally; the degree condition is measured into the report.
    """
    if L_min < 1:
        raise ValueError("L_min must be >= 1")
    n = G.n
    rng = random.Random(seed)
    cap = max_L if max_L is not None else 8 * L_min
    L = L_min
    order = list(range(n))
    rng.shuffle(order)

    def equitable(order_: list[int], L_: int) -> tuple[list[list[int]], list[int]]:
        m_ = n // L_
        if m_ == 0:
            raise BudgetExhausted(f"cannot split {n} vertices into {L_} clusters")
        clusters_ = [sorted(order_[i * m_ : (i + 1) * m_]) for i in range(L_)]
        exceptional_ = sorted(order_[L_ * m_ :])
        return clusters_, exceptional_

    clusters, exceptional = equitable(order, L)
    rounds = 0
    for rounds in range(max_rounds + 1):
        if rounds == max_rounds:
            break
        # find irregularity witnesses
        splits: dict[int, list[int]] = {}
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                if i in splits or j in splits:
                    continue
                verdict = is_eps_regular(
                    G,
                    clusters[i],
                    clusters[j],
                    eps,
                    mode="heuristic",
                    trials=heuristic_trials,
                    seed=rng.randrange(1 << 30),
                )
                if verdict.regular:
                    continue
                X, Y = verdict.witness
                if 0 < len(X) < len(clusters[i]):
                    splits[i] = list(X)
                if 0 < len(Y) < len(clusters[j]):
                    splits[j] = list(Y)
        if not splits:
            break
        if 2 * len(clusters) > cap:
            break
        # split marked clusters along their witnesses, re-chop equitably
        pieces: list[int] = []
        for i, cluster in enumerate(clusters):
            if i in splits:
                w = set(splits[i])
                pieces.extend(v for v in cluster if v in w)
                pieces.extend(v for v in cluster if v not in w)
            else:
                pieces.extend(cluster)
        pieces.extend(exceptional)
        L = min(cap, 2 * L)
        clusters, exceptional = equitable(pieces, L)
        if len(exceptional) > eps * n:
            raise BudgetExhausted(
                f"exceptional set grew to {len(exceptional)} > eps*n"
            )

    m = len(clusters[0])
    masks = [mask_of(c) for c in clusters]
    # pure-graph assembly: keep regular+dense pairs, drop the rest
    pair_verdicts: dict[tuple[int, int], str] = {}
    r_edges: list[tuple[int, int]] = []
    keep_mask_pairs: list[tuple[int, int]] = []
    for i in range(L):
        for j in range(i + 1, L):
            dens = G.edges_between(masks[i], masks[j]) / (m * m)
            if dens < delta:
                pair_verdicts[(i, j)] = "sparse"
                continue
            verdict = is_eps_regular(
                G, clusters[i], clusters[j], eps,
                mode="heuristic", trials=heuristic_trials,
                seed=rng.randrange(1 << 30),
            )
            if verdict.regular:
                pair_verdicts[(i, j)] = "regular-heuristic"
                r_edges.append((i, j))
                keep_mask_pairs.append((i, j))
            else:
                pair_verdicts[(i, j)] = "irregular"

    keep = [[False] * L for _ in range(L)]
    for i, j in keep_mask_pairs:
        keep[i][j] = keep[j][i] = True
    cluster_of = {}
    for i, c in enumerate(clusters):
        for v in c:
            cluster_of[v] = i
    exc_mask = mask_of(exceptional)
    pure_rows = [0] * n
    for v in range(n):
        ci = cluster_of.get(v)
        if ci is None:
            pure_rows[v] = G.rows[v]  # exceptional vertices keep their edges
            continue
        row = G.rows[v] & exc_mask
        for j in range(L):
            if keep[ci][j]:
                row |= G.rows[v] & masks[j]
        pure_rows[v] = row
    # symmetrize (exceptional rows may refer to dropped pairs)
    for v in range(n):
        for u in bits(pure_rows[v]):
            if not pure_rows[u] >> v & 1:
                pure_rows[v] &= ~(1 << u)
    pure = DenseGraph(n, pure_rows, check=False)

    partition = ClusterPartition(
        tuple(exceptional), tuple(tuple(c) for c in clusters)
    )
    R = ReducedGraph(
        DenseGraph.from_edges(L, r_edges),
        pair_params={e: (eps, delta) for e in r_edges},
    )
    hist: dict[int, int] = {}
    for v in range(n):
        loss = G.degree(v) - pure.degree(v)
        bucket = int(10 * loss / max(1, n))
        hist[bucket] = hist.get(bucket, 0) + 1
    report = PartitionReport(
        L=L,
        m=m,
        exceptional_size=len(exceptional),
        pair_verdicts=pair_verdicts,
        degree_loss_histogram=hist,
        rounds=rounds,
    )
    return partition, pure, R, report
