"""Global caps. ``STRAT_MAX_DEGREE`` in the environment overrides the degree cap."""

import os
from dataclasses import dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class Caps:
    max_prime: int = 7
    # None means "derive from the input" (4 * (1 + max entry degree)).
    degree_cap: Optional[int] = None
    gauge_search_budget: int = 400
    gauge_exhaustive_limit: int = 2048


def current_caps() -> Caps:
    caps = Caps()
    env = os.environ.get("STRAT_MAX_DEGREE")
    if env:
        caps = replace(caps, degree_cap=int(env))
    return caps
