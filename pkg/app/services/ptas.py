"""
Configuration PTAS for agents with identical additive valuations.

A configuration (w, m) stands in for a set of goods: w is 0 or a power of two
giving the order of magnitude, m counts goods per rounded value level i*delta^2*w
for levels above lambda, and m[lambda] counts "small" goods (value at most
delta*w) in units of delta*w. Agents are processed in ascending weight order and
a layered graph over principal configurations is searched for the path whose
edge values give the best welfare; the path is then turned back into bundles.
"""
import itertools
import logging
import math
from collections import Counter
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import (
    BudgetExceededError,
    InternalInvariantError,
    ParameterError,
    UnsupportedProfileError,
)
from app.schemas.instance import Allocation, IdenticalProfile, Instance
from app.schemas.params import PtasParams
from app.schemas.result import Solution
from app.services.layered_dag import (
    Aggregation,
    LayeredPath,
    aggregation_for,
    best_layered_path,
)
from app.services.welfare import objective_welfare, require_symmetric

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


def _pow2(exponent: int) -> Fraction:
    return Fraction(2) ** exponent


def _floor_log2(x: Fraction) -> int:
    exponent = x.numerator.bit_length() - x.denominator.bit_length()
    while _pow2(exponent) > x:
        exponent -= 1
    while _pow2(exponent + 1) <= x:
        exponent += 1
    return exponent


def ceil_pow2(x: Fraction) -> Fraction:
    """Smallest integral power of two >= x (x > 0)."""
    power = _pow2(_floor_log2(x))
    return power if power == x else power * 2


def _rounding(u: Fraction, params: PtasParams) -> Tuple[Fraction, int]:
    # w: largest power of two with u > delta*w, i.e. w < lambda*u
    bound = params.lambda_ * u
    w = _pow2(_floor_log2(bound))
    if w == bound:
        w /= 2
    i = math.ceil(u / (params.delta_squared * w))
    return w, i


def round_value(u: Fraction, params: PtasParams) -> Fraction:
    """
    Round u up to a multiple of delta^2*w, w the largest power of two with u > delta*w.

    Guarantees u <= r(u) < (1 + delta) * u; r(0) = 0.
    """
    u = Fraction(u)
    if u == 0:
        return ZERO
    w, i = _rounding(u, params)
    return i * params.delta_squared * w


class Configuration(NamedTuple):
    """(w, m): magnitude plus sparse (level, count) pairs sorted by level."""
    w: Fraction
    counts: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def build(cls, w: Fraction, counts: Mapping[int, int]) -> "Configuration":
        return cls(Fraction(w), tuple(sorted((lvl, c) for lvl, c in counts.items() if c > 0)))

    def count(self, level: int) -> int:
        for lvl, c in self.counts:
            if lvl == level:
                return c
        return 0

    def as_dict(self) -> Dict[int, int]:
        return dict(self.counts)


def configuration_value(w: Fraction, counts: Mapping[int, int], params: PtasParams) -> Fraction:
    """V(w, m) = sum_i m_i * i * delta^2 * w; counts may be signed differences."""
    return sum((c * lvl for lvl, c in counts.items()), 0) * params.delta_squared * Fraction(w)


class ConfigurationSpace:
    """Rounded goods of one identical-valuation instance plus their principal configurations."""

    def __init__(self, values: Mapping[int, Fraction], params: PtasParams):
        self.params = params
        self.values: Dict[int, Fraction] = {g: Fraction(u) for g, u in values.items()}
        if any(u <= 0 for u in self.values.values()):
            raise ValueError("configuration goods must have positive value")
        self.rounded: Dict[int, Fraction] = {
            g: round_value(u, params) for g, u in self.values.items()
        }
        self.magnitudes: List[Fraction] = sorted({ceil_pow2(u) for u in self.values.values()})
        self._tops: Dict[Fraction, Configuration] = {}

    @classmethod
    def for_instance(cls, instance: Instance, params: PtasParams) -> "ConfigurationSpace":
        if not isinstance(instance.profile, IdenticalProfile):
            raise UnsupportedProfileError("configurations need an identical additive profile")
        values = instance.profile.values
        return cls({g: u for g, u in enumerate(values) if u > 0}, params)

    @property
    def goods(self) -> List[int]:
        return sorted(self.values)

    def is_small(self, good: int, w: Fraction) -> bool:
        return self.values[good] <= self.params.delta * w

    def level_of(self, good: int, w: Fraction) -> Optional[int]:
        """Rounded level of a good w.r.t. w, or None when the good is small or above w."""
        u = self.values[good]
        if u > w or u <= self.params.delta * w:
            return None
        level = self.rounded[good] / (self.params.delta_squared * w)
        if level.denominator != 1:
            raise InternalInvariantError(f"good {good} has no integral level at w={w}")
        return int(level)

    def configuration_at(self, goods: Iterable[int], w: Fraction) -> Configuration:
        """The representation of `goods` at magnitude w with m_lambda rounded up."""
        params = self.params
        counts: Counter = Counter()
        small = ZERO
        for good in goods:
            if self.is_small(good, w):
                small += self.rounded[good]
            else:
                counts[self.level_of(good, w)] += 1
        counts[params.lambda_] = math.ceil(small / (params.delta * w))
        return Configuration.build(w, counts)

    def top(self, w: Fraction) -> Configuration:
        """Principal configuration of M(w) = {j : u_j <= w}."""
        if w not in self._tops:
            self._tops[w] = self.configuration_at(
                (g for g, u in self.values.items() if u <= w), w
            )
        return self._tops[w]

    def is_principal_shape(self, counts: Iterable[Tuple[int, int]]) -> bool:
        half = Fraction(self.params.top_level, 2)
        return any(c > 0 and lvl > half for lvl, c in counts)


def principal_configuration_of(goods: Iterable[int], space: ConfigurationSpace) -> Configuration:
    """Representing configuration with the smallest w and m_lambda = ceil(Vr(A(w)) / (delta*w))."""
    goods = list(goods)
    if not goods:
        return Configuration(ZERO)
    w = ceil_pow2(max(space.values[g] for g in goods))
    return space.configuration_at(goods, w)


def represents(config: Configuration, goods: Iterable[int], space: ConfigurationSpace) -> bool:
    """Check the three representation conditions of `config` for a set of goods."""
    goods = list(goods)
    params = space.params
    if config.w == 0:
        return not goods and not config.counts
    w = config.w
    if any(space.values[g] > w for g in goods):
        return False
    big: Counter = Counter()
    small = ZERO
    for good in goods:
        if space.is_small(good, w):
            small += space.rounded[good]
        else:
            big[space.level_of(good, w)] += 1
    levels = {lvl: c for lvl, c in config.counts if lvl != params.lambda_}
    if levels != dict(big):
        return False
    return abs(small - config.count(params.lambda_) * params.delta * w) < params.delta * w


def scale_configuration(
    config: Configuration, w_target: Fraction, params: PtasParams
) -> Configuration:
    """
    Re-express a configuration at a larger magnitude w_target.

    The canonical multiset (m_i goods of value i*delta^2*w) is rounded at
    w_target; of the two admissible small-good counts the one within
    delta*w_target/2 of the small value is kept, ties toward the larger.
    """
    w_target = Fraction(w_target)
    if w_target == config.w:
        return config
    if w_target < config.w:
        raise ValueError("configurations can only be scaled up")
    if config.w == 0:
        return Configuration(w_target)
    unit = params.delta_squared * config.w
    new_unit = params.delta_squared * w_target
    counts: Counter = Counter()
    small = ZERO
    for level, count in config.counts:
        value = level * unit
        if value > params.delta * w_target:
            new_level = value / new_unit
            if new_level.denominator != 1:
                raise InternalInvariantError(f"level {level} does not scale to w={w_target}")
            counts[int(new_level)] += count
        else:
            small += count * value
    step = params.delta * w_target
    quotient = small / step
    upper = math.ceil(quotient)
    if abs(small - upper * step) <= step / 2:
        counts[params.lambda_] = upper
    else:
        counts[params.lambda_] = math.floor(quotient)
    return Configuration.build(w_target, counts)


def enumerate_principal_configurations(space: ConfigurationSpace) -> List[Configuration]:
    """
    All principal configurations: (0, empty) plus, for every candidate w, the count
    vectors below the representation of M(w) with some level above lambda^2/2.

    Raises:
        BudgetExceededError: If the sparse boxes hold more than SOLVER_BUDGET vectors
    """
    boxes = []
    volume = 1
    for w in space.magnitudes:
        top = space.top(w)
        boxes.append((w, top))
        volume += math.prod(c + 1 for _, c in top.counts)
    if volume > settings.SOLVER_BUDGET:
        raise BudgetExceededError("principal configuration enumeration", volume, settings.SOLVER_BUDGET)

    configs = [Configuration(ZERO)]
    for w, top in boxes:
        levels = [lvl for lvl, _ in top.counts]
        for combo in itertools.product(*(range(c + 1) for _, c in top.counts)):
            counts = tuple((lvl, c) for lvl, c in zip(levels, combo) if c > 0)
            if space.is_principal_shape(counts):
                configs.append(Configuration(w, counts))
    logger.info(f"Enumerated {len(configs)} principal configurations over {len(boxes)} magnitudes")
    return configs


class ConfigGraph:
    """
    Layered configuration graph. Layer 0 is the source (empty configuration),
    layers 1..n-1 hold every principal configuration, layer n the configuration
    of all goods. Edge structure is identical between consecutive layers, so
    successors are stored once per configuration.
    """

    def __init__(
        self,
        space: ConfigurationSpace,
        configs: List[Configuration],
        successors: List[List[Tuple[int, Fraction]]],
        weights: Sequence[Fraction],
    ):
        self.space = space
        self.configs = configs
        self.index = {config: k for k, config in enumerate(configs)}
        self.successors = successors
        self.weights = list(weights)
        self.n = len(self.weights)
        self.source = self.index[Configuration(ZERO)]
        self.target = self.index[principal_configuration_of(space.goods, space)]

    def layer(self, i: int) -> List[int]:
        if i == 0:
            return [self.source]
        if i == self.n:
            return [self.target]
        return list(range(len(self.configs)))

    def edges_into(self, i: int, u: int) -> List[Tuple[int, Fraction]]:
        return self.successors[u]

    @property
    def edge_count(self) -> int:
        return sum(len(edges) for edges in self.successors)


def build_configuration_graph(
    space: ConfigurationSpace, ordered_weights: Sequence[Fraction]
) -> ConfigGraph:
    """
    Build the configuration graph for agents already sorted by ascending weight.

    An edge (w, m) -> (w', m') exists if the configurations are equal (empty
    bundle) or if m'' = scale(m, w') <= m' and V(w', m' - m'') >= w'/3.
    """
    params = space.params
    configs = enumerate_principal_configurations(space)
    index = {config: k for k, config in enumerate(configs)}
    successors: List[List[Tuple[int, Fraction]]] = []
    budget = settings.SOLVER_BUDGET
    edge_total = 0

    for config in configs:
        edges: List[Tuple[int, Fraction]] = [(index[config], ZERO)]
        for w in space.magnitudes:
            if w < config.w:
                continue
            scaled = scale_configuration(config, w, params).as_dict()
            top = space.top(w)
            box = top.as_dict()
            if any(box.get(lvl, 0) < c for lvl, c in scaled.items()):
                continue
            levels = [lvl for lvl, _ in top.counts]
            ranges = [range(scaled.get(lvl, 0), box[lvl] + 1) for lvl in levels]
            for combo in itertools.product(*ranges):
                counts = tuple((lvl, c) for lvl, c in zip(levels, combo) if c > 0)
                if not space.is_principal_shape(counts):
                    continue
                added = {lvl: c - scaled.get(lvl, 0) for lvl, c in zip(levels, combo)}
                value = configuration_value(w, added, params)
                if value * 3 < w or value == 0:
                    continue
                edges.append((index[Configuration(w, counts)], value))
        edge_total += len(edges)
        if edge_total > budget:
            raise BudgetExceededError("configuration graph edges", edge_total, budget)
        successors.append(edges)

    graph = ConfigGraph(space, configs, successors, ordered_weights)
    logger.info(
        f"Configuration graph: {len(configs)} configurations, {graph.edge_count} edges per layer, "
        f"{graph.n} layers"
    )
    return graph


def best_path(graph: ConfigGraph, aggregation: Aggregation) -> LayeredPath:
    """Best source-to-target path; ties go to the smallest configuration id sequence."""
    layers = [graph.layer(i) for i in range(graph.n + 1)]
    return best_layered_path(layers, graph.edges_into, aggregation)


def extend_bundle(
    allocated: Set[int],
    config_allocated: Configuration,
    target: Configuration,
    space: ConfigurationSpace,
) -> Set[int]:
    """
    Grow the allocated set A into a set B represented by the target configuration.

    Per level above lambda the missing goods are taken by descending value; then
    small goods are added until their rounded value exceeds (m_lambda - 1)*delta*w'.

    Raises:
        InternalInvariantError: If a level has too few unused goods
    """
    params = space.params
    w = target.w
    scaled = scale_configuration(config_allocated, w, params)
    result = set(allocated)
    for level, have in scaled.counts:
        if level != params.lambda_ and target.count(level) < have:
            raise InternalInvariantError(f"target configuration drops goods of level {level}")

    if w == 0:
        return result
    for level, want in target.counts:
        if level == params.lambda_:
            continue
        need = want - scaled.count(level)
        pool = sorted(
            (g for g in space.goods if g not in result and space.level_of(g, w) == level),
            key=lambda g: (-space.values[g], g),
        )
        if len(pool) < need:
            raise InternalInvariantError(
                f"only {len(pool)} unused goods of level {level} at w={w}, {need} required"
            )
        result.update(pool[:need])

    threshold = (target.count(params.lambda_) - 1) * params.delta * w
    small_total = sum(
        (space.rounded[g] for g in result if space.is_small(g, w)), ZERO
    )
    for good in sorted(
        (g for g in space.goods if g not in result and space.is_small(g, w)),
        key=lambda g: (-space.values[g], g),
    ):
        if small_total > threshold:
            break
        result.add(good)
        small_total += space.rounded[good]
    return result


def recover_bundles(graph: ConfigGraph, path: LayeredPath) -> List[List[int]]:
    """Replay extend_bundle along the path; leftovers go to the last layer's bundle."""
    space = graph.space
    allocated: Set[int] = set()
    current = graph.configs[path.vertices[0]]
    bundles: List[List[int]] = []
    for vertex in path.vertices[1:]:
        target = graph.configs[vertex]
        if target == current:
            bundles.append([])
            continue
        grown = extend_bundle(allocated, current, target, space)
        bundles.append(sorted(grown - allocated))
        allocated, current = grown, target
    leftover = sorted(set(space.goods) - allocated)
    if leftover:
        logger.debug(f"Appending {len(leftover)} leftover goods to the heaviest agent")
        bundles[-1] = sorted(bundles[-1] + leftover)
    return bundles


def _zero_optimum(instance: Instance, method: str, parameters: dict) -> Solution:
    # fewer positive goods than agents: every allocation has zero welfare
    allocation = Allocation.from_bundles([range(instance.m)] + [[] for _ in range(instance.n - 1)])
    p = parameters.get("p", 0)
    return Solution(
        method=method,
        allocation=allocation,
        welfare=objective_welfare(instance, allocation, p),
        zero_welfare=True,
        parameters=parameters,
        guarantee="exact: optimum welfare is zero",
    )


def _params(epsilon: float, lambda_override: Optional[int]) -> PtasParams:
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    try:
        return PtasParams.from_epsilon(epsilon, lambda_override)
    except ValidationError as e:
        raise ParameterError(f"invalid lambda {lambda_override}: must be an even integer >= 2") from e


def _solve(instance: Instance, params: PtasParams, p: float, method: str) -> Solution:
    if not isinstance(instance.profile, IdenticalProfile):
        raise UnsupportedProfileError(f"{method} needs an identical additive profile")
    values = instance.profile.values
    positive = [g for g, u in enumerate(values) if u > 0]
    zeros = [g for g, u in enumerate(values) if u == 0]
    parameters = {"epsilon": params.epsilon, "lambda": params.lambda_, "p": p}
    if p <= 0 and len(positive) < instance.n:
        return _zero_optimum(instance, method, parameters)

    order = sorted(range(instance.n), key=lambda agent: (instance.weights[agent], agent))
    ordered_weights = [instance.weights[agent] for agent in order]
    space = ConfigurationSpace.for_instance(instance, params)
    graph = build_configuration_graph(space, ordered_weights)
    path = best_path(graph, aggregation_for(p, ordered_weights))
    layered = recover_bundles(graph, path)

    bundles: List[List[int]] = [[] for _ in range(instance.n)]
    for position, agent in enumerate(order):
        bundles[agent] = layered[position]
    bundles[0] = bundles[0] + zeros
    allocation = Allocation.from_bundles(bundles)
    welfare = objective_welfare(instance, allocation, p)
    return Solution(
        method=method,
        allocation=allocation,
        welfare=welfare,
        zero_welfare=welfare.is_zero,
        parameters=parameters,
        guarantee=params.guarantee(),
    )


def ptas_solve(
    instance: Instance, epsilon: float, lambda_override: Optional[int] = None
) -> Solution:
    """
    (1 - eps)-approximate Nash welfare for identical additive valuations.

    Args:
        instance: Identical-additive instance, any positive weights
        epsilon: Target approximation in (0, 1)
        lambda_override: Explicit rounding parameter; the guarantee only holds
            when it is at least 12 and at least (16 - 8 eps)/eps

    Raises:
        ParameterError: If epsilon is outside (0, 1) or lambda is not even
        UnsupportedProfileError: If the profile is not identical additive
    """
    return _solve(instance, _params(epsilon, lambda_override), 0.0, "ptas")


def pmean_ptas_solve(
    instance: Instance, epsilon: float, p: float, lambda_override: Optional[int] = None
) -> Solution:
    """
    Approximate p-mean welfare for symmetric agents with identical valuations.

    p = 0 is Nash welfare, p = -inf the egalitarian objective.

    Raises:
        UnsupportedProfileError: If weights differ and p != 0
    """
    if p != 0:
        require_symmetric(instance)
    return _solve(instance, _params(epsilon, lambda_override), p, "pmean")
