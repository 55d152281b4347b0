"""Category pools, exact balanced sampling, and incremental sweep schedules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .numerics.core import rng as seeded_rng
from .records import Category, LabeledExample, Origin


@dataclass
class CategoryPools:
    """Per-category example lists; unannotated examples sit in remainder."""

    pools: dict[Category, list[LabeledExample]]
    remainder: list[LabeledExample] = field(default_factory=list)

    def counts(self) -> dict[str, dict[str, int]]:
        out = {}
        for cat, pool in self.pools.items():
            synthetic = sum(1 for ex in pool if ex.origin is Origin.SYNTHETIC)
            out[cat.value] = {"total": len(pool), "real": len(pool) - synthetic, "synthetic": synthetic}
        return out


@dataclass
class RebalanceSpec:
    """Target count per category plus the sampling seed.

    Pools at or above their target are undersampled without replacement;
    smaller pools are used in full, with the deficit drawn preferentially
    from real examples with replacement (synthetic examples already appear
    once each, which keeps duplicates to real rows whenever possible).
    """

    targets: dict[Category, int]
    seed: int = 0

    def __post_init__(self):
        for cat in Category:
            self.targets.setdefault(cat, 0)
        if any(t < 0 for t in self.targets.values()):
            raise ValueError("targets must be >= 0")

    @classmethod
    def uniform(cls, target: int, seed: int = 0) -> "RebalanceSpec":
        return cls({c: target for c in Category}, seed)


def build_pools(examples: list[LabeledExample], synthetic: list[LabeledExample] | None = None) -> CategoryPools:
    """Route annotated examples to their category pool, then add synthetic."""
    pools: dict[Category, list[LabeledExample]] = {c: [] for c in Category}
    remainder: list[LabeledExample] = []
    for ex in examples:
        if ex.category is None:
            remainder.append(ex)
        else:
            pools[ex.category].append(ex)
    for ex in synthetic or []:
        if ex.category is None:
            raise DataError("synthetic examples must carry a category")
        pools[ex.category].append(ex)
    return CategoryPools(pools=pools, remainder=remainder)


def sample_balanced(pools: CategoryPools, spec: RebalanceSpec) -> list[LabeledExample]:
    """Exactly ``spec.targets[c]`` examples per category, in shuffled order."""
    rng = seeded_rng(spec.seed)
    chosen: list[LabeledExample] = []
    for cat in Category:
        target = spec.targets[cat]
        if target == 0:
            continue
        pool = pools.pools[cat]
        if not pool:
            raise DataError(f"category {cat.value} has an empty pool but target {target}")
        if len(pool) >= target:
            picks = rng.choice(len(pool), size=target, replace=False)
            chosen.extend(pool[i] for i in picks)
            continue
        chosen.extend(pool)
        deficit = target - len(pool)
        real_indices = [i for i, ex in enumerate(pool) if ex.origin is Origin.REAL]
        refill = real_indices if real_indices else list(range(len(pool)))
        extra = rng.choice(len(refill), size=deficit, replace=True)
        chosen.extend(pool[refill[i]] for i in extra)
    order = rng.permutation(len(chosen))
    return [chosen[i] for i in order]


@dataclass
class SweepSchedule:
    """A strictly monotone target sequence for one category."""

    category: Category
    targets: list[int]
    fixed_targets: dict[Category, int]

    def specs(self, seed: int = 0) -> list[RebalanceSpec]:
        out = []
        for i, t in enumerate(self.targets):
            targets = dict(self.fixed_targets)
            targets[self.category] = t
            out.append(RebalanceSpec(targets=targets, seed=seed + i))
        return out


def make_sweep(category: Category, start: int, stop: int, step: int, fixed_targets: dict[Category, int]) -> SweepSchedule:
    """Uniform schedule from ``start`` to ``stop`` inclusive.

    Toxic categories sweep upward and non-toxic categories downward,
    mirroring the direction each category moves during full rebalancing.
    ``start == stop`` gives a single-point schedule.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if start < 0 or stop < 0:
        raise ValueError("targets must be >= 0")
    span = stop - start
    if span % step != 0:
        raise ValueError(f"range {start}..{stop} is not divisible by step {step}")
    if span != 0:
        upward = span > 0
        if category.is_toxic and not upward:
            raise ValueError(f"{category.value} sweeps upward; got {start} -> {stop}")
        if not category.is_toxic and upward:
            raise ValueError(f"{category.value} sweeps downward; got {start} -> {stop}")
    signed = step if span >= 0 else -step
    count = abs(span) // step + 1
    targets = [start + signed * i for i in range(count)]
    fixed = {c: int(v) for c, v in fixed_targets.items() if c is not category}
    return SweepSchedule(category=category, targets=targets, fixed_targets=fixed)
