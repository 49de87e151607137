"""Training-set strategies over real and synthetic pools, and the cost/time budget frontier."""

import logging
import math
from typing import List, Optional, Sequence, Tuple

from ..models.annotation import DatasetManifest, Origin, Provenance, Split
from ..models.errors import InfeasibleBudget, PoolOverlap, PoolTooSmall
from ..models.mixture import BudgetParams, MixtureSpec
from ..utils.rng import seeded_rng


logger = logging.getLogger(__name__)

SUITE_TOTAL = 1000

# (n_real, n_synth) as quarters of the suite total
STRATEGIES = {
    'real_only': [(1, 0), (2, 0), (3, 0), (4, 0)],
    'mixed': [(3, 1), (2, 2), (1, 3)],
    'synthetic_only': [(0, 1), (0, 2), (0, 3), (0, 4)]
}


def _origin(spec: MixtureSpec) -> Origin:
    if spec.n_real and spec.n_synth:
        return Origin.MIXED
    if spec.n_synth:
        return Origin.SYNTHETIC
    return Origin.REAL


def build_mixture(real_pool: DatasetManifest, synth_pool: DatasetManifest,
                  spec: MixtureSpec) -> DatasetManifest:
    """Sample a mixture without replacement and shuffle it, all from spec.seed.

    Raises:
        PoolTooSmall: A pool holds fewer images than requested
        PoolOverlap: The pools share image names
    """
    if spec.n_real > len(real_pool):
        raise PoolTooSmall(f"{spec.name} needs {spec.n_real} real images, pool has {len(real_pool)}")
    if spec.n_synth > len(synth_pool):
        raise PoolTooSmall(f"{spec.name} needs {spec.n_synth} synthetic images, pool has {len(synth_pool)}")

    shared = set(real_pool.image_names) & set(synth_pool.image_names)
    if shared:
        raise PoolOverlap(f"Pools share {len(shared)} image names, e.g. {sorted(shared)[0]}")

    rng = seeded_rng(spec.seed)
    real_pick = rng.permutation(len(real_pool))[:spec.n_real]
    synth_pick = rng.permutation(len(synth_pool))[:spec.n_synth]

    records = [real_pool.records[i] for i in real_pick] + [synth_pool.records[i] for i in synth_pick]
    records = [records[i] for i in rng.permutation(len(records))]

    provenance = Provenance(
        master_seed=spec.seed,
        method_tag=synth_pool.provenance.method_tag if spec.n_synth else None,
        config_digest=synth_pool.provenance.config_digest if spec.n_synth else real_pool.provenance.config_digest,
        extra={'mixture': spec.to_dict()}
    )
    manifest = DatasetManifest(records=records, origin=_origin(spec), split=Split.TRAIN, provenance=provenance)
    logger.debug(f"Built mixture {spec.name} (seed {spec.seed}) with {len(manifest)} images")
    return manifest


def suite_specs(seed: int, total: int = SUITE_TOTAL) -> List[Tuple[str, MixtureSpec]]:
    """The eleven (strategy, spec) pairs for one seed."""
    quarter = total // 4
    return [
        (strategy, MixtureSpec(n_real=r * quarter, n_synth=s * quarter, seed=seed))
        for strategy, pairs in STRATEGIES.items()
        for r, s in pairs
    ]


def strategy_suite(real_pool: DatasetManifest, synth_pool: DatasetManifest, seeds: Sequence[int],
                   total: int = SUITE_TOTAL) -> List[Tuple[MixtureSpec, DatasetManifest]]:
    """Every strategy mixture for every seed, in seed order."""
    suite = []
    for seed in seeds:
        for strategy, spec in suite_specs(seed, total):
            manifest = build_mixture(real_pool, synth_pool, spec)
            manifest.provenance.extra['strategy'] = strategy
            suite.append((spec, manifest))

    logger.info(f"Built strategy suite: {len(suite)} manifests over {len(seeds)} seeds")
    return suite


def _max_count(budget: float, unit: float, cap: int) -> int:
    """Largest n <= cap with n * unit <= budget."""
    if unit <= 0:
        return cap if budget >= 0 else -1
    n = min(cap, int(math.floor(budget / unit)))
    while n >= 0 and n * unit > budget:
        n -= 1
    while n < cap and (n + 1) * unit <= budget:
        n += 1
    return n


def budget_frontier(params: BudgetParams, step: int, n_synth_max: Optional[int] = None,
                    min_total: int = 0) -> List[Tuple[int, int]]:
    """Feasible (n_real, n_synth) pairs under both the cost and the time budget.

    n_real runs over multiples of step; n_synth is the largest count that
    still fits. When synthetic images are free the count is unbounded and
    n_synth_max must be given; otherwise it defaults to ten times the larger
    budget. Pairs totalling fewer than min_total images are dropped.

    Raises:
        InfeasibleBudget: No pair qualifies
    """
    if step < 1:
        raise ValueError(f"Step must be at least 1, got {step}")
    params.validate()

    synth_free = params.c_synth == 0 and params.t_synth == 0
    if n_synth_max is None:
        if synth_free:
            raise ValueError("Synthetic images cost nothing; pass n_synth_max to bound the frontier")
        n_synth_max = int(10 * max(params.c_total, params.t_total))

    real_cap = min(
        _max_count(params.c_total, params.c_real, n_synth_max),
        _max_count(params.t_total, params.t_real, n_synth_max)
    )

    pairs = []
    for n_real in range(0, max(real_cap, -1) + 1, step):
        cost_left = params.c_total - n_real * params.c_real
        time_left = params.t_total - n_real * params.t_real
        n_synth = min(
            _max_count(cost_left, params.c_synth, n_synth_max),
            _max_count(time_left, params.t_synth, n_synth_max)
        )
        if n_synth < 0 or n_real + n_synth < min_total:
            continue
        pairs.append((n_real, n_synth))

    if not pairs:
        raise InfeasibleBudget(f"No (n_real, n_synth) pair fits {params.to_dict()} with min_total={min_total}")
    return pairs
