"""Powers of (near-)Hamilton cycles by the connecting-absorbing method.

Pipeline: absorber blocks -> absorbing path -> flanking cliques -> reservoir
-> path cover -> threading through the reservoir -> cycle closure -> final
absorption.  Every probabilistic existence step becomes a seeded construction
whose postcondition is verified exactly; the final witness is always run
through the generic validator before being returned.  Stage failures carry
the stage name; the driver retries the stochastic stages with derived seeds.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .connect import ConnectError, HypothesisViolation, connect_cliques, find_bridging_clique
from .constants import ConstantsHierarchy, default_hampower_constants
from .density import DensityParams, find_clique, is_locally_dense_sampled
from .graphs import DenseGraph, WitnessSequence, bits, mask_of, validate_witness


class StageFailure(RuntimeError):
    """A labelled failure of one pipeline stage."""

    def __init__(self, stage: str, detail: str = ""):
        self.stage = stage
        self.detail = detail
        super().__init__(f"{stage}: {detail}" if detail else stage)


@dataclass(frozen=True)
class AbsorberSystem:
    """Disjoint K_{2r} blocks plus, per vertex, the blocks inside its
    neighbourhood."""

    r: int
    blocks: tuple[tuple[int, ...], ...]
    coverage: dict[int, tuple[int, ...]]

    def revalidate(self, G: DenseGraph) -> None:
        used: set[int] = set()
        for block in self.blocks:
            assert len(block) == 2 * self.r
            assert G.is_clique(block)
            assert not used & set(block)
            used |= set(block)
        for v in range(G.n):
            expect = tuple(
                i
                for i, block in enumerate(self.blocks)
                if all(G.has_edge(v, w) for w in block if w != v)
                and v not in block
            )
            assert self.coverage.get(v, ()) == expect, f"coverage wrong at {v}"


@dataclass(frozen=True)
class AbsorbingPath:
    """A 2r-path of blocks and connectors with one insertion slot per block."""

    r: int
    path: WitnessSequence  # power-2r path
    blocks: tuple[tuple[int, ...], ...]
    block_start: tuple[int, ...]  # position of each block inside the path

    @property
    def S(self) -> tuple[int, ...]:
        return self.path.vertices[: 2 * self.r]

    @property
    def E_end(self) -> tuple[int, ...]:
        return self.path.vertices[-2 * self.r :]

    def insertion_position(self, block_index: int) -> int:
        """Sequence position after which an absorbed vertex lands (the slot
        between the r-th and (r+1)-th block vertex)."""
        return self.block_start[block_index] + self.r


def build_absorber(
    G: DenseGraph,
    r: int,
    constants: ConstantsHierarchy | None = None,
    seed: int = 0,
    coverage_target: int | None = None,
    max_blocks: int | None = None,
) -> AbsorberSystem:
    """Greedily pick vertex-disjoint K_{2r}'s until every vertex sees enough
    blocks inside its neighbourhood or the block budget runs out.

    Always serves the currently worst-covered vertex; failing to find any
    disjoint block inside that vertex's neighbourhood is the
    coverage-unreachable signal (the density/degree hypotheses are too weak
    at this scale).
    """
    constants = constants or default_hampower_constants()
    if coverage_target is None:
        coverage_target = 2 * r + 2
    if max_blocks is None:
        eta0 = constants.get("eta0", 0.6)
        max_blocks = max(1, int(eta0 * G.n / (8 * r)))
    rng = random.Random(f"absorber:{seed}") if seed is not None else None
    blocks: list[tuple[int, ...]] = []
    used = 0
    coverage = [0] * G.n
    while len(blocks) < max_blocks:
        worst = min(range(G.n), key=lambda v: (coverage[v], v))
        if coverage[worst] >= coverage_target:
            break
        scope = G.rows[worst] & ~used
        got = find_clique(G, 2 * r, within=scope, rng=rng)
        if got is None:
            if blocks and min(coverage) > 0:
                break  # budget-style exit: every vertex has some coverage
            raise StageFailure(
                "absorber",
                f"coverage-unreachable: no disjoint K_{2 * r} inside the "
                f"neighbourhood of starved vertex {worst}",
            )
        blocks.append(got)
        used |= mask_of(got)
        bm = mask_of(got)
        for v in range(G.n):
            if not bm >> v & 1 and (G.rows[v] & bm) == bm:
                coverage[v] += 1
    cov_map = {}
    for v in range(G.n):
        vmask = 1 << v
        cov_map[v] = tuple(
            i
            for i, block in enumerate(blocks)
            if not mask_of(block) & vmask and (G.rows[v] & mask_of(block)) == mask_of(block)
        )
    system = AbsorberSystem(r, tuple(blocks), cov_map)
    system.revalidate(G)
    return system


def build_absorbing_path(
    G: DenseGraph,
    absorber: AbsorberSystem,
    constants: ConstantsHierarchy | None = None,
    seed: int = 0,
    connector_c: int | None = None,
) -> AbsorbingPath:
    """Thread the absorber blocks into one power-2r path.

    Consecutive blocks are joined by fresh 6r-vertex connectors at power 2r,
    with the avoided set growing as connectors are placed; the result has
    exactly (t-1)*8r + 2r vertices and is validated before being returned.
    """
    constants = constants or default_hampower_constants()
    r = absorber.r
    d1 = constants.get("d1", 0.3)
    blocks = absorber.blocks
    if not blocks:
        raise StageFailure("absorber", "no blocks to thread")
    if connector_c is None:
        connector_c = 2 * r
    protected = set()
    for b in blocks:
        protected |= set(b)
    sequence: list[int] = list(blocks[0])
    starts = [0]
    avoid = set(protected)
    for i in range(len(blocks) - 1):
        X, Y = list(blocks[i]), list(blocks[i + 1])
        W = sorted(avoid - set(X) - set(Y))
        try:
            conn = connect_cliques(
                G, X, Y, W, r=2 * r, eta=d1, c=connector_c,
                w_limit=G.n,  # the growing path itself dwarfs eta*n/4 here
                seed=f"{seed}:pabs:{i}" if seed is not None else None,
            )
        except (ConnectError, HypothesisViolation) as exc:
            raise StageFailure(
                "connector", f"absorbing path, block pair ({i},{i + 1}): {exc}"
            ) from exc
        sequence.extend(conn.path.vertices)
        starts.append(len(sequence))
        sequence.extend(blocks[i + 1])
        avoid |= set(conn.path.vertices)
    path = WitnessSequence(tuple(sequence), "path", 2 * r)
    res = validate_witness(G, path)
    if not res:
        raise StageFailure("connector", f"absorbing path invalid: {res.reason}")
    expected = (len(blocks) - 1) * 8 * r + 2 * r
    assert len(sequence) == expected, (len(sequence), expected)
    return AbsorbingPath(r, path, blocks, tuple(starts))


def _match_to_blocks(candidates: dict[int, list[int]]) -> dict[int, int]:
    """Maximum bipartite matching z -> block via augmenting paths.

    Raises matching-infeasible naming the first unmatchable vertex.
    """
    match_block: dict[int, int] = {}
    order = sorted(candidates, key=lambda z: (len(candidates[z]), z))
    for z in order:
        seen: set[int] = set()

        def augment(u: int) -> bool:
            for b in candidates[u]:
                if b in seen:
                    continue
                seen.add(b)
                if b not in match_block or augment(match_block[b]):
                    match_block[b] = u
                    return True
            return False

        if not augment(z):
            raise StageFailure(
                "matching-infeasible", f"no free interior block for vertex {z}"
            )
    return {z: b for b, z in match_block.items()}


def absorb(
    G: DenseGraph,
    pabs: AbsorbingPath,
    Z: list[int],
    eta2_limit: float | None = None,
) -> WitnessSequence:
    """Insert each z of Z into a distinct interior block, keeping the path's
    first and last 2r vertices intact; returns the power-r path.

    Each z needs an interior block fully inside its neighbourhood; the
    assignment is a maximum bipartite matching and a Hall violation is
    reported as matching-infeasible naming the unmatched vertex.
    """
    r = pabs.r
    pset = set(pabs.path.vertices)
    if set(Z) & pset:
        raise StageFailure("absorb", "Z intersects the absorbing path")
    if eta2_limit is not None and len(Z) > eta2_limit:
        raise StageFailure(
            "cover-too-lossy", f"|Z|={len(Z)} exceeds eta2 budget {eta2_limit:.1f}"
        )
    t = len(pabs.blocks)
    usable = range(1, t - 1)  # interior blocks only: ends anchor the closure
    candidates: dict[int, list[int]] = {}
    for z in Z:
        opts = [
            j
            for j in usable
            if (G.rows[z] & mask_of(pabs.blocks[j])) == mask_of(pabs.blocks[j])
        ]
        if not opts:
            raise StageFailure(
                "matching-infeasible",
                f"vertex {z} is adjacent to no interior block",
            )
        candidates[z] = opts
    result = _match_to_blocks(candidates) if candidates else {}
    inserts: dict[int, int] = {}
    for z, j in result.items():
        inserts[pabs.insertion_position(j)] = z
    # rebuild with explicit slot positions (slot p means "after p vertices")
    out: list[int] = []
    for pos, v in enumerate(pabs.path.vertices):
        out.append(v)
        if (pos + 1) in inserts:
            out.append(inserts[pos + 1])
    witness = WitnessSequence(tuple(out), "path", r)
    res = validate_witness(G, witness)
    if not res:
        raise StageFailure("absorb", f"absorbed path invalid: {res.reason}")
    assert witness.vertices[: 2 * r] == pabs.S
    assert witness.vertices[-2 * r :] == pabs.E_end
    return witness


def select_reservoir(
    G: DenseGraph,
    eta3: float,
    eta: float,
    seed: int = 0,
    exclude: tuple[int, ...] = (),
    retries: int = 50,
    size: int | None = None,
) -> tuple[int, ...]:
    """Draw V' of size eta3*n with d(x, V') >= (1/2+eta/2)|V'| for every x.

    Seeded random selection with full verification and bounded retries
    replaces the concentration argument.
    """
    n = G.n
    if size is None:
        size = max(1, round(eta3 * n))
    pool = [v for v in range(n) if v not in set(exclude)]
    if len(pool) < size:
        raise StageFailure("reservoir", f"pool {len(pool)} smaller than size {size}")
    pool_mask = mask_of(pool)
    # advisory degree precheck into the pool (recorded in failures)
    worst = min(range(n), key=lambda x: G.degree_into(x, pool_mask))
    worst_deg = G.degree_into(worst, pool_mask)
    rng = random.Random(f"{seed}:reservoir")
    need = (0.5 + eta / 2) * size

    def deficit_vertex(dmask: int) -> int | None:
        for x in range(n):
            if (G.rows[x] & dmask).bit_count() < need:
                return x
        return None

    for _ in range(retries):
        draw = set(rng.sample(pool, size))
        dmask = mask_of(draw)
        # greedy repair: swap a draw vertex for a pool neighbour of the
        # currently starving vertex; bounded, then re-drawn
        for _ in range(2 * size):
            x = deficit_vertex(dmask)
            if x is None:
                return tuple(sorted(draw))
            gains = [v for v in bits(G.rows[x] & pool_mask & ~dmask)]
            if not gains:
                break
            u_in = rng.choice(gains)
            swappable = [u for u in draw if not G.has_edge(x, u)] or list(draw)
            u_out = rng.choice(swappable)
            draw.discard(u_out)
            draw.add(u_in)
            dmask = mask_of(draw)
        if deficit_vertex(dmask) is None:
            return tuple(sorted(draw))
    raise StageFailure(
        "reservoir",
        f"retries-exhausted after {retries} draws of size {size} "
        f"(weakest vertex {worst} has {worst_deg}/{len(pool)} pool neighbours, "
        f"needs {need:.1f} into the draw)",
    )


def cover_with_paths(
    G2: DenseGraph,
    r_cover: int,
    min_path: int,
    seed: int = 0,
    max_paths: int | None = None,
    target_len: int | None = None,
    backoffs: int = 6,
) -> tuple[list[WitnessSequence], list[int]]:
    """Cover G2 by vertex-disjoint power-r_cover paths of length >= min_path.

    Greedy: seed each path with a clique, repeatedly append a vertex adjacent
    to the last r_cover vertices (preferring vertices that are hard to reach
    later), falling back to head extension and bounded pop-and-retry
    rotations.  Returns (paths, leftover); cover quality is measured by the
    caller, degenerate covers are legal.
    """
    rng = random.Random(f"{seed}:cover")
    remaining = G2.full_mask()
    paths: list[WitnessSequence] = []
    leftover: list[int] = []

    def extend_once(seq: list[int], pool: int, at_head: bool) -> bool:
        anchor = seq[:r_cover] if at_head else seq[-r_cover:]
        cands = pool & G2.common_neighborhood(anchor)
        if not cands:
            return False
        ranked = sorted(
            bits(cands),
            key=lambda v: ((G2.rows[v] & pool).bit_count(), v),
        )
        pick = ranked[0] if len(ranked) == 1 or rng.random() < 0.7 else rng.choice(ranked[: min(3, len(ranked))])
        if at_head:
            seq.insert(0, pick)
        else:
            seq.append(pick)
        return True

    def grow_path(goal: int, scope: int) -> list[int] | None:
        """One greedy path attempt inside ``scope``; None when no seed fits."""
        core = find_clique(G2, min(r_cover, scope.bit_count()), within=scope)
        if core is None:
            return None
        seq = list(core)
        pool = scope & ~mask_of(seq)
        tabu = 0
        budget = backoffs
        while len(seq) < goal:
            if extend_once(seq, pool, at_head=False):
                pool &= ~mask_of(seq)
                continue
            if extend_once(seq, pool, at_head=True):
                pool &= ~mask_of(seq)
                continue
            if budget > 0 and r_cover < len(seq) < min_path:
                # rotation-style retreat, only while the path is unusable
                victim = seq.pop()
                tabu |= 1 << victim
                pool &= ~tabu
                budget -= 1
                continue
            break
        return seq

    while remaining.bit_count() >= min_path and (
        max_paths is None or len(paths) < max_paths
    ):
        if target_len is not None:
            goal = target_len
        elif max_paths is not None:
            # spread the remaining vertices over the paths still to come
            goal = max(min_path, math.ceil(remaining.bit_count() / (max_paths - len(paths))))
        else:
            goal = G2.n
        seq = None
        scope = remaining
        for _ in range(4):  # reseed around an unlucky core
            got = grow_path(goal, scope)
            if got is None:
                break
            if len(got) >= min_path:
                seq = got
                break
            scope &= ~(1 << got[0])
            if scope.bit_count() < min_path:
                break
        if seq is None:
            if got is None:
                break
            # stranded: drop the last attempt into the leftover and keep going
            leftover.extend(got)
            remaining &= ~mask_of(got)
            continue
        w = WitnessSequence(tuple(seq), "path", r_cover)
        check = validate_witness(G2, w)
        assert check, f"greedy cover emitted a bad path: {check.reason}"
        paths.append(w)
        remaining &= ~mask_of(seq)

    # post-pass: tack stray vertices onto path ends where adjacency allows
    strays = remaining
    changed = True
    while changed and strays:
        changed = False
        for i, w in enumerate(paths):
            seq = list(w.vertices)
            for v in list(bits(strays)):
                if (G2.rows[v] & mask_of(seq[-r_cover:])).bit_count() == min(
                    r_cover, len(seq)
                ):
                    seq.append(v)
                    strays &= ~(1 << v)
                    changed = True
                elif (G2.rows[v] & mask_of(seq[:r_cover])).bit_count() == min(
                    r_cover, len(seq)
                ):
                    seq.insert(0, v)
                    strays &= ~(1 << v)
                    changed = True
            if len(seq) != len(w.vertices):
                w2 = WitnessSequence(tuple(seq), "path", r_cover)
                assert validate_witness(G2, w2)
                paths[i] = w2
    leftover.extend(bits(strays))
    return paths, sorted(leftover)


# -- the full pipeline ------------------------------------------------------


@dataclass
class HamConfig:
    coverage_target: int | None = None
    max_blocks: int | None = None
    connector_c: int | None = None
    attempts: int = 30
    reservoir_retries: int = 50
    reservoir_size: int | None = None
    strict_prechecks: bool = False
    flank_budget: int = 200_000


@dataclass
class HamPlan:
    """Desk-scale sizing for one run, derived from (n, r, constants)."""

    t_blocks: int
    C: int
    min_path: int
    r_cover: int
    reservoir: int
    target_paths: int

    @staticmethod
    def derive(n: int, r: int, constants: ConstantsHierarchy, config: HamConfig) -> "HamPlan":
        eta0 = constants.get("eta0", 0.8)
        flank = 2 * r + 1
        C = r
        min_path = 2 * C + 1
        r_cover = max(2 * r, C)
        t_max = 1
        for t in range(1, n):
            need = (t - 1) * 8 * r + 2 * r + 2 * flank + max(4, r + 2) + min_path
            if need <= n:
                t_max = t
            else:
                break
        budget = max(2, int(eta0 * n / (8 * r)))
        t = min(t_max, budget)
        if t < 2:
            raise StageFailure(
                "absorber", f"host too small: cannot fit two blocks plus flanks at n={n}"
            )
        B = n - ((t - 1) * 8 * r + 2 * r) - 2 * flank
        capacity = max(0, t - 2)
        # tiny reservoirs make the verified draw statistically hopeless, so
        # insist on a floor of ~5 whenever the absorber can swallow the slack
        reserve_floor = max(r + 2, 5 if capacity >= 1 else 4)
        plan = None
        for p in range(max(1, B // (min_path + r)), 0, -1):
            R = max(r * (p + 1), reserve_floor)
            slack = R - r * (p + 1)
            if slack > capacity:
                continue
            G2 = B - R
            if G2 >= p * min_path:
                plan = (p, R)
                break
        if plan is None:
            raise StageFailure(
                "reservoir",
                f"no feasible sizing at n={n}, r={r}, t={t} (budget {B})",
            )
        p, R = plan
        if config.reservoir_size is not None:
            R = config.reservoir_size
        return HamPlan(
            t_blocks=t,
            C=C,
            min_path=min_path,
            r_cover=r_cover,
            reservoir=R,
            target_paths=p,
        )


@dataclass
class HamAudit:
    """Per-stage records for one find_hamilton_power call."""

    prechecks: dict[str, bool] = field(default_factory=dict)
    attempts: int = 0
    stages: list[str] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)
    plan: HamPlan | None = None


def _reorder_ends(
    seq: tuple[int, ...], C: int, head_first: tuple[int, ...] | None, tail_last: tuple[int, ...] | None
) -> list[int]:
    """Reorder a cover path so the connector-attached r-subsets sit innermost:
    head_first comes first in the head block, tail_last comes last in the
    tail block (both blocks are cliques, so any order inside them is valid)."""
    out = list(seq)
    if head_first is not None:
        head = list(seq[:C])
        chosen = [v for v in head if v in set(head_first)]
        rest = [v for v in head if v not in set(head_first)]
        out[:C] = chosen + rest
    if tail_last is not None:
        tail = list(out[-C:])
        chosen = [v for v in tail if v in set(tail_last)]
        rest = [v for v in tail if v not in set(tail_last)]
        out[-C:] = rest + chosen
    return out


def find_hamilton_power(
    G: DenseGraph,
    r: int,
    n_target: int | None = None,
    constants: ConstantsHierarchy | None = None,
    seed: int = 0,
    config: HamConfig | None = None,
    audit: HamAudit | None = None,
) -> WitnessSequence:
    """Find the r-th power of a cycle covering exactly n_target vertices.

    Runs the full connecting-absorbing pipeline; stochastic stages (reservoir
    draw, cover randomisation) are retried with derived seeds up to the
    configured attempt budget.  The returned witness is always validated; on
    exhaustion the last stage-labelled failure is re-raised.
    """
    constants = constants or default_hampower_constants()
    config = config or HamConfig()
    audit = audit if audit is not None else HamAudit()
    n = G.n
    if n_target is None:
        n_target = n
    if not 1 <= n_target <= n:
        raise StageFailure("precheck", f"n_target={n_target} outside [1, {n}]")

    if n_target < n:
        keep = sorted(
            sorted(range(n), key=lambda v: (-G.degree(v), v))[:n_target]
        )
        sub, ids = G.induced(keep)
        inner_audit = audit
        witness = find_hamilton_power(
            sub, r, None, constants, seed, config, inner_audit
        )
        mapped = tuple(ids[v] for v in witness.vertices)
        out = WitnessSequence(mapped, "cycle", r)
        res = validate_witness(G, out)
        assert res, f"mapped cycle invalid: {res.reason}"
        return out

    # advisory prechecks (recorded; the construction is its own certificate)
    p = DensityParams(constants.get("rho", 0.05), constants.get("d", 0.3))
    eta = constants.get("eta", 0.2)
    audit.prechecks["locally-dense-sampled"] = bool(
        is_locally_dense_sampled(G, p, trials=200, seed=seed)
    )
    audit.prechecks["min-degree"] = G.min_degree() >= (0.5 + eta) * n
    if config.strict_prechecks and not all(audit.prechecks.values()):
        raise StageFailure("precheck", f"prechecks failed: {audit.prechecks}")

    plan = HamPlan.derive(n, r, constants, config)
    audit.plan = plan
    eta2 = constants.get("eta2", 0.1)

    # Everything is rebuilt per attempt under a derived seed: the clique
    # searches are seed-shuffled so that which vertices the absorber, path
    # and flanks consume varies, keeping the residual pool unbiased.
    last_failure: StageFailure | None = None
    for attempt in range(config.attempts):
        audit.attempts = attempt + 1
        sub_seed = f"{seed}:attempt:{attempt}"
        try:
            witness = _one_attempt(
                G, r, plan, constants, eta, eta2, sub_seed, config, audit
            )
            res = validate_witness(G, witness)
            assert res, f"final cycle invalid: {res.reason}"
            assert len(witness.vertices) == n
            return witness
        except StageFailure as exc:
            audit.failures.append((exc.stage, exc.detail))
            last_failure = exc
    assert last_failure is not None
    raise last_failure


def _one_attempt(
    G: DenseGraph,
    r: int,
    plan: HamPlan,
    constants: ConstantsHierarchy,
    eta: float,
    eta2: float,
    sub_seed: str,
    config: HamConfig,
    audit: HamAudit,
) -> WitnessSequence:
    n = G.n
    absorber = build_absorber(
        G,
        r,
        constants,
        sub_seed,
        coverage_target=config.coverage_target,
        max_blocks=config.max_blocks or plan.t_blocks,
    )
    _note(audit, "absorber")
    pabs = build_absorbing_path(G, absorber, constants, sub_seed, config.connector_c)
    _note(audit, "absorbing-path")

    # flanking cliques adjacent to everything in S / E
    rng = random.Random(f"{sub_seed}:flank")
    pset = mask_of(pabs.path.vertices)
    want = 2 * plan.C + 1
    flank_S = None
    scope_S = G.common_neighborhood(pabs.S) & ~pset
    for size in range(want, 2 * r, -1):
        flank_S = find_clique(G, size, within=scope_S, node_budget=config.flank_budget, rng=rng)
        if flank_S is not None:
            break
    if flank_S is None:
        raise StageFailure("flank-clique", "no clique >= 2r+1 adjacent to all of S")
    scope_E = G.common_neighborhood(pabs.E_end) & ~pset & ~mask_of(flank_S)
    flank_E = None
    for size in range(want, 2 * r, -1):
        flank_E = find_clique(G, size, within=scope_E, node_budget=config.flank_budget, rng=rng)
        if flank_E is not None:
            break
    if flank_E is None:
        raise StageFailure("flank-clique", "no clique >= 2r+1 adjacent to all of E")
    C = min(plan.C, (len(flank_S) - 1) // 2, (len(flank_E) - 1) // 2)
    if C < r:
        raise StageFailure("flank-clique", f"flank cliques too small for C >= r ({C})")
    _note(audit, "flank-clique")

    protected = pset | mask_of(flank_S) | mask_of(flank_E)
    pool = [v for v in range(n) if not protected >> v & 1]
    return _thread_and_close(
        G, r, plan, C, pabs, flank_S, flank_E, pool, eta, eta2, sub_seed, config
    )


def _note(audit: HamAudit, stage: str) -> None:
    if stage not in audit.stages:
        audit.stages.append(stage)


def _thread_and_close(
    G: DenseGraph,
    r: int,
    plan: HamPlan,
    C: int,
    pabs: AbsorbingPath,
    flank_S: tuple[int, ...],
    flank_E: tuple[int, ...],
    pool: list[int],
    eta: float,
    eta2: float,
    sub_seed: str,
    config: HamConfig,
) -> WitnessSequence:
    n = G.n
    reservoir = select_reservoir(
        G,
        0.0,
        eta,
        seed=sub_seed,
        exclude=tuple(v for v in range(n) if v not in pool),
        retries=config.reservoir_retries,
        size=plan.reservoir,
    )
    g2_vertices = sorted(set(pool) - set(reservoir))
    G2, ids = G.induced(g2_vertices)
    paths2, leftover2 = cover_with_paths(
        G2,
        plan.r_cover,
        plan.min_path,
        seed=sub_seed,
        max_paths=plan.target_paths,
    )
    cover_paths = [tuple(ids[v] for v in w.vertices) for w in paths2]
    uncovered = [ids[v] for v in leftover2]

    # threading order: flank_E first, cover paths, flank_S last
    segs: list[tuple[int, ...]] = [tuple(sorted(flank_E))] + cover_paths + [
        tuple(sorted(flank_S))
    ]
    head_orders: list[tuple[int, ...] | None] = [None] * len(segs)
    tail_orders: list[tuple[int, ...] | None] = [None] * len(segs)
    connectors: list[tuple[int, ...]] = []
    used_res: set[int] = set()
    for i in range(len(segs) - 1):
        E_i = list(segs[i][-C:])
        S_next = list(segs[i + 1][:C])
        try:
            bridge = find_bridging_clique(
                G,
                U=list(reservoir),
                X=E_i,
                Y=S_next,
                W=sorted(used_res),
                r=r,
                eta=eta / 2,
            )
        except (ConnectError, HypothesisViolation) as exc:
            raise StageFailure(
                "connector", f"threading pair ({i},{i + 1}): {exc}"
            ) from exc
        assert set(bridge.Z) <= set(reservoir) and len(bridge.Z) == r
        used_res |= set(bridge.Z)
        connectors.append(tuple(sorted(bridge.Z)))
        tail_orders[i] = bridge.X_prime
        head_orders[i + 1] = bridge.Y_prime

    big: list[int] = []
    for i, seg in enumerate(segs):
        big.extend(_reorder_ends(seg, C, head_orders[i], tail_orders[i]))
        if i < len(connectors):
            big.extend(connectors[i])

    leftovers = sorted(set(uncovered) | (set(reservoir) - used_res))
    if len(leftovers) > eta2 * n:
        raise StageFailure(
            "cover-too-lossy",
            f"{len(leftovers)} uncovered vertices exceed eta2*n = {eta2 * n:.1f}",
        )
    absorbed = absorb(G, pabs, leftovers, eta2_limit=eta2 * n)
    cycle = WitnessSequence(tuple(absorbed.vertices) + tuple(big), "cycle", r)
    res = validate_witness(G, cycle)
    if not res:
        raise StageFailure("closure", f"cycle validation failed: {res.reason}")
    return cycle
