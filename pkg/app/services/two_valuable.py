"""
Exact maximum Nash welfare for 2-valuable instances.

Every agent's valuation depends on at most two goods. Forced assignments are
committed first (unique interest, single remaining neighbour, K22 blocks);
what remains is solved as a maximum-weight matching on the graph H whose
vertices are agents and goods:

  * an agent that already holds a good g and still wants one more good j
    gets the edge (i, j) weighted by its marginal log gain;
  * an agent holding nothing with neighbours j, j' gets (i, j), (i, j') and
    the good-good edge (j, j') meaning "i takes both", each lifted by a
    constant C that dominates every log difference.
"""
import logging
from typing import Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.core.errors import UnsupportedProfileError
from app.schemas.instance import AgentTable, Allocation, Instance, TwoValuableProfile
from app.schemas.result import Solution
from app.services.matching import (
    WeightedGraph,
    bipartite_matching,
    is_matching,
    max_weight_matching,
)
from app.services.welfare import log_rational, nash_welfare

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def influencing_goods(table: AgentTable) -> Tuple[int, ...]:
    """Goods of T_i whose presence can change v_i."""
    if len(table.goods) < 2:
        return tuple(g for g, v in zip(table.goods, table.single) if v > 0)
    a, b = table.goods
    va, vb = table.single
    result = []
    if va > 0 or table.pair > vb:
        result.append(a)
    if vb > 0 or table.pair > va:
        result.append(b)
    return tuple(result)


class ReducedState(BaseModel):
    """Residual interest graph plus the goods committed so far."""
    neighbours: Dict[int, Set[int]] = Field(default_factory=dict)
    held: List[List[int]] = Field(default_factory=list)
    zero_flag: bool = False

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @classmethod
    def initial(cls, profile: TwoValuableProfile) -> "ReducedState":
        return cls(
            neighbours={i: set(influencing_goods(t)) for i, t in enumerate(profile.tables)},
            held=[[] for _ in profile.tables],
        )

    @property
    def remaining(self) -> List[int]:
        return sorted(self.neighbours)

    @property
    def n_prime(self) -> Dict[int, int]:
        """Remaining agents holding exactly one good g_i."""
        return {i: self.held[i][0] for i in self.remaining if len(self.held[i]) == 1}

    def interested(self, good: int) -> List[int]:
        return [i for i in self.remaining if good in self.neighbours[i]]

    def remaining_goods(self) -> List[int]:
        return sorted(set().union(*self.neighbours.values())) if self.neighbours else []

    def assign(self, agent: int, good: int) -> None:
        self.held[agent].append(good)
        for goods in self.neighbours.values():
            goods.discard(good)


def _require_profile(instance: Instance) -> TwoValuableProfile:
    if not isinstance(instance.profile, TwoValuableProfile):
        raise UnsupportedProfileError("two_valuable needs a two-valuable profile")
    return instance.profile


def _assign_unique_goods(state: ReducedState) -> bool:
    changed = False
    for good in state.remaining_goods():
        interested = state.interested(good)
        if len(interested) == 1:
            state.assign(interested[0], good)
            changed = True
    return changed


def _assign_forced_goods(state: ReducedState) -> bool:
    changed = False
    for agent in state.remaining:
        if not state.held[agent] and len(state.neighbours[agent]) == 1:
            state.assign(agent, next(iter(state.neighbours[agent])))
            changed = True
    return changed


def _drop_saturated(instance: Instance, state: ReducedState) -> bool:
    """Forget neighbours that add nothing to what an agent already holds."""
    tables = _require_profile(instance).tables
    changed = False
    for agent in state.remaining:
        held = state.held[agent]
        if not held:
            continue
        base = tables[agent].value(held)
        stale = {j for j in state.neighbours[agent] if tables[agent].value(held + [j]) == base}
        if stale:
            state.neighbours[agent] -= stale
            changed = True
    return changed


def _remove_finished(state: ReducedState) -> bool:
    finished = [i for i in state.remaining if state.held[i] and not state.neighbours[i]]
    for agent in finished:
        del state.neighbours[agent]
    return bool(finished)


def _hall_violated(instance: Instance, state: ReducedState) -> bool:
    """Agents whose utility is still zero must each be matchable to a distinct good."""
    tables = _require_profile(instance).tables
    needy = {}
    for agent in state.remaining:
        held = state.held[agent]
        if not held or tables[agent].value(held) == 0:
            needy[agent] = sorted(state.neighbours[agent])
    if not needy:
        return False
    mate = bipartite_matching(needy)
    if len(mate) < len(needy):
        logger.info(f"Hall violator: only {len(mate)} of {len(needy)} needy agents can be served")
        return True
    return False


def _split_key(instance: Instance, split: List[Tuple[int, int]]) -> Tuple[int, float]:
    zeros, total = 0, 0.0
    for agent, good in split:
        value = instance.bundle_value(agent, (good,))
        if value == 0:
            zeros += 1
        else:
            total += float(instance.weights[agent]) * log_rational(value)
    return (-zeros, total)


def _resolve_k22(instance: Instance, state: ReducedState) -> bool:
    blocks: Dict[Tuple[int, ...], List[int]] = {}
    for agent in state.remaining:
        if not state.held[agent] and len(state.neighbours[agent]) == 2:
            blocks.setdefault(tuple(sorted(state.neighbours[agent])), []).append(agent)
    for (j1, j2), agents in sorted(blocks.items()):
        if len(agents) < 2:
            continue
        i1, i2 = agents[:2]
        straight = [(i1, j1), (i2, j2)]
        swapped = [(i1, j2), (i2, j1)]
        best = swapped if _split_key(instance, swapped) > _split_key(instance, straight) else straight
        logger.debug(f"K22 block agents {i1},{i2} goods {j1},{j2}: committing {best}")
        for agent, good in best:
            state.assign(agent, good)
        return True
    return False


def reduce_instance(instance: Instance) -> ReducedState:
    """
    Commit forced assignments until none applies.

    Each pass: goods with one interested agent go to it, agents holding
    nothing with one neighbour take it, neighbours that add no value to a
    holder are dropped, finished agents leave, a Hall check
    flags zero optimum welfare, and one K22 block is split.

    Raises:
        UnsupportedProfileError: If the profile is not two-valuable
    """
    profile = _require_profile(instance)
    state = ReducedState.initial(profile)
    changed = True
    while changed:
        changed = _assign_unique_goods(state)
        changed = _assign_forced_goods(state) or changed
        changed = _drop_saturated(instance, state) or changed
        changed = _remove_finished(state) or changed
        if _hall_violated(instance, state):
            state.zero_flag = True
            break
        changed = _resolve_k22(instance, state) or changed
    logger.info(
        f"Reduced instance: {len(state.remaining)} agents left, "
        f"{len(state.n_prime)} holding one good, zero_flag={state.zero_flag}"
    )
    return state


class MatchingGraph(BaseModel):
    """H together with the bookkeeping needed to read allocations back."""
    graph: WeightedGraph
    pair_owner: Dict[Edge, int]
    big_constant: float
    sentinel: float

    model_config = ConfigDict(arbitrary_types_allowed=True)


def _lift_constant(instance: Instance) -> float:
    profile = _require_profile(instance)
    total = 0.0
    for weight, table in zip(instance.weights, profile.tables):
        entries = [v for v in table.single if v > 0]
        if table.pair is not None and table.pair > 0:
            entries.append(table.pair)
        if entries:
            total += float(weight) * max(abs(log_rational(v)) for v in entries)
    return 1.0 + 3.0 * total


def build_h(instance: Instance, state: ReducedState) -> MatchingGraph:
    """Vertices 0..n-1 are agents, n+j is good j."""
    n = instance.n
    big = _lift_constant(instance)
    sentinel = -(2.0 + n * big)

    def lifted(agent: int, goods: Tuple[int, ...]) -> float:
        value = instance.bundle_value(agent, goods)
        if value == 0:
            return sentinel
        return big + float(instance.weights[agent]) * log_rational(value)

    edges: Dict[Edge, float] = {}
    pair_owner: Dict[Edge, int] = {}
    holders = state.n_prime
    for agent in state.remaining:
        goods = sorted(state.neighbours[agent])
        eta = float(instance.weights[agent])
        if agent in holders:
            g = holders[agent]
            for j in goods:
                base = instance.bundle_value(agent, (g,))
                if base > 0:
                    gain = instance.bundle_value(agent, (g, j))
                    edges[(agent, n + j)] = eta * (log_rational(gain) - log_rational(base))
                else:
                    edges[(agent, n + j)] = lifted(agent, (g, j))
        elif len(goods) == 2:
            j1, j2 = goods
            edges[(agent, n + j1)] = lifted(agent, (j1,))
            edges[(agent, n + j2)] = lifted(agent, (j2,))
            key = (n + j1, n + j2)
            weight = lifted(agent, (j1, j2))
            if key not in edges or weight > edges[key]:
                edges[key] = weight
                pair_owner[key] = agent
    graph = WeightedGraph(
        num_vertices=n + instance.m,
        edges=tuple((u, v, w) for (u, v), w in sorted(edges.items())),
    )
    return MatchingGraph(graph=graph, pair_owner=pair_owner, big_constant=big, sentinel=sentinel)


def _fallback(instance: Instance, state: ReducedState) -> Allocation:
    bundles = [list(b) for b in state.held]
    assigned = {g for b in bundles for g in b}
    bundles[0].extend(g for g in range(instance.m) if g not in assigned)
    return Allocation.from_bundles(bundles)


def recover_allocation(
    instance: Instance, state: ReducedState, h: MatchingGraph, matching: Set[Edge]
) -> Allocation:
    """Turn a matching of H into a complete allocation."""
    n = instance.n
    bundles = [list(b) for b in state.held]
    received: Set[int] = set()
    for u, v in sorted(matching):
        if u < n:
            bundles[u].append(v - n)
            received.add(u)
        else:
            owner = h.pair_owner[(u, v)]
            bundles[owner].extend((u - n, v - n))
            received.add(owner)

    holders = state.n_prime
    assigned = {g for b in bundles for g in b}
    for good in state.remaining_goods():
        if good in assigned:
            continue
        adjacent = state.interested(good)
        target: Optional[int] = next((a for a in adjacent if a not in received), None)
        if target is None:
            target = next(
                (a for a in adjacent if a not in holders and len(bundles[a]) == 1), 0
            )
        bundles[target].append(good)
        assigned.add(good)
    bundles[0].extend(g for g in range(instance.m) if g not in assigned)
    return Allocation.from_bundles(bundles)


def induced_matching(instance: Instance, state: ReducedState, allocation: Allocation) -> Set[Edge]:
    """The edge set of H that an allocation of the reduced instance corresponds to."""
    n = instance.n
    holders = state.n_prime
    edges: Set[Edge] = set()
    for agent in state.remaining:
        fresh = sorted(g for g in allocation.bundles[agent] if g in state.neighbours[agent])
        if agent in holders or len(fresh) == 1:
            edges.update((agent, n + g) for g in fresh)
        elif len(fresh) == 2:
            edges.add((n + fresh[0], n + fresh[1]))
    if not is_matching(edges):
        raise ValueError("allocation does not induce a matching of H")
    return edges


def solve_two_valuable(instance: Instance) -> Solution:
    """
    Maximum Nash welfare allocation for a two-valuable instance.

    Raises:
        UnsupportedProfileError: If the profile is not two-valuable
    """
    state = reduce_instance(instance)
    if state.zero_flag:
        allocation = _fallback(instance, state)
        return Solution(
            method="two_valuable",
            allocation=allocation,
            welfare=nash_welfare(instance, allocation),
            zero_welfare=True,
            guarantee="exact: optimum welfare is zero",
        )

    h = build_h(instance, state)
    matching = max_weight_matching(h.graph)
    allocation = recover_allocation(instance, state, h, matching)
    welfare = nash_welfare(instance, allocation)
    logger.info(
        f"Two-valuable solve: H has {len(h.graph.edges)} edges, matched {len(matching)}, "
        f"zero={welfare.is_zero}"
    )
    return Solution(
        method="two_valuable",
        allocation=allocation,
        welfare=welfare,
        zero_welfare=welfare.is_zero,
        parameters={"lift": h.big_constant},
        guarantee="exact: optimum welfare is zero" if welfare.is_zero else "exact",
    )
