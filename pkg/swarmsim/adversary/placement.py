# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import logging
from enum import Enum
from typing import FrozenSet
from typing import Iterable
from typing import Optional

import numpy as np

from ..graph import DEFAULT_EDGE_THRESHOLD
from ..graph import WeightedGraph

log = logging.getLogger("swarmsim.adversary")


class PlacementStrategy(str, Enum):
    RANDOM = "random"
    MAX_DEGREE = "max_degree"
    MAX_SIGNAL_STRENGTH = "max_signal_strength"


def select_adversaries(
    g: WeightedGraph,
    strategy: PlacementStrategy,
    f: int,
    seed: Optional[int] = None,
    threshold: float = DEFAULT_EDGE_THRESHOLD,
    exclude: Iterable[int] = (),
) -> FrozenSet[int]:
    """ Pick f distinct nodes outside ``exclude``; ties on degree or strength go to the lower id """
    strategy = PlacementStrategy(strategy)
    taken = set(int(i) for i in exclude)
    candidates = np.array([i for i in range(g.n) if i not in taken], dtype=int)
    if f < 0:
        raise ValueError(f"Expected f >= 0, got {f}")
    if f > len(candidates):
        raise ValueError(f"Cannot place {f} adversaries among {len(candidates)} available of n={g.n} nodes")
    if f == 0:
        return frozenset()

    if strategy is PlacementStrategy.RANDOM:
        rng = np.random.default_rng(seed)
        chosen = rng.choice(candidates, size=f, replace=False)
    else:
        if strategy is PlacementStrategy.MAX_DEGREE:
            score = g.degrees(threshold)[candidates]
        else:
            score = g.weighted_degrees()[candidates]
        # lexsort: last key is primary
        order = np.lexsort((candidates, -score))
        chosen = candidates[order[:f]]
    selected = frozenset(int(i) for i in chosen)
    log.debug("%s placement picked %s", strategy.value, sorted(selected))
    return selected
