"""Generator construction from sparse rate lists."""

from __future__ import annotations

from typing import Iterable, Tuple

import numpy as np

from fdtlab.app.infra.errors import DuplicateEntry, NegativeRate, SelfLoop
from fdtlab.app.infra.logger import get_logger
from .types import Generator, StateSpace

logger = get_logger(__name__)

RateEntry = Tuple[int, int, float]


def build_generator(space: StateSpace, offdiag_rates: Iterable[RateEntry]) -> Generator:
    """Generator with the given off-diagonal rates and a diagonal filled so rows sum to 0.

    Raises:
        NegativeRate: a listed rate is negative
        DuplicateEntry: the same (x, y) pair appears twice
        SelfLoop: x == y
    """
    rates = np.zeros((space.n, space.n))
    seen: set[tuple[int, int]] = set()
    count = 0
    for x, y, rate in offdiag_rates:
        xi, yi = space.index(x), space.index(y)
        rate = float(rate)
        if xi == yi:
            raise SelfLoop(xi)
        if rate < 0 or not np.isfinite(rate):
            raise NegativeRate(xi, yi, rate)
        if (xi, yi) in seen:
            raise DuplicateEntry(xi, yi)
        seen.add((xi, yi))
        rates[xi, yi] = rate
        count += 1
    np.fill_diagonal(rates, -rates.sum(axis=1))
    logger.debug("built generator", extra={"extra_fields": {"n": space.n, "entries": count}})
    return Generator(space, rates)


def ring_generator(n: int, clockwise: float = 1.0, counter: float = 0.0) -> Generator:
    """Nearest-neighbour walk on an n-ring."""
    space = StateSpace.of_size(n)
    rates: dict[tuple[int, int], float] = {}
    for x in range(n):
        for y, rate in (((x + 1) % n, clockwise), ((x - 1) % n, counter)):
            if rate > 0:
                rates[(x, y)] = rates.get((x, y), 0.0) + rate
    return build_generator(space, [(x, y, r) for (x, y), r in rates.items()])


def two_state_generator(a: float, b: float) -> Generator:
    """c(0,1) = a, c(1,0) = b."""
    return build_generator(StateSpace.of_size(2), [(0, 1, a), (1, 0, b)])
