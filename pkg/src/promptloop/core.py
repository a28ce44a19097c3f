"""Domain types and the pure numeric kernel.

Types model one candidate pair of records, the pool of candidates, and the
per-pair committee result. The kernel covers the positive-vote ratio, the
binary label-distribution entropy used to rank ambiguity, the committee
temperature ladder, and the demonstration search-space count.

Everything here is a pure function over immutable values; all of it is safe
to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ValidationError

MATCH = 1
NON_MATCH = 0

VALID_LABELS = (NON_MATCH, MATCH)


def validate_label(value: int) -> int:
    """Check that ``value`` is a binary label (0 = non-match, 1 = match)."""
    if value not in VALID_LABELS:
        raise ValidationError(f"label must be 0 or 1, got {value!r}")
    return value


@dataclass(frozen=True)
class EntityRecord:
    """One record: an ordered attribute-name -> text-value map."""

    attributes: Mapping[str, str]

    def __post_init__(self):
        if not self.attributes:
            raise ValidationError("record must have at least one attribute")
        for name in self.attributes:
            if not isinstance(name, str) or not name.strip():
                raise ValidationError(f"attribute name must be nonempty text, got {name!r}")

    def lines(self) -> list[str]:
        """Serialize as ``name: value`` lines, preserving attribute order."""
        return [f"{name}: {value}" for name, value in self.attributes.items()]


@dataclass(frozen=True)
class EntityPair:
    """A candidate pair of records, optionally carrying a gold label."""

    id: str
    left: EntityRecord
    right: EntityRecord
    gold: int | None = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("pair id must be nonempty")
        if self.gold is not None:
            validate_label(self.gold)


@dataclass
class SamplingPool:
    """Ordered collection of candidate pairs with unique ids."""

    pairs: list[EntityPair] = field(default_factory=list)

    def __post_init__(self):
        seen: set[str] = set()
        for pair in self.pairs:
            if pair.id in seen:
                raise ValidationError(f"duplicate pair id in pool: {pair.id!r}")
            seen.add(pair.id)
        self._by_id = {pair.id: pair for pair in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def ids(self) -> list[str]:
        return [pair.id for pair in self.pairs]

    def get(self, pair_id: str) -> EntityPair:
        try:
            return self._by_id[pair_id]
        except KeyError:
            raise ValidationError(f"unknown pair id: {pair_id!r}") from None


@dataclass(frozen=True)
class UncertaintyScore:
    """Committee result for one pair: the votes plus derived statistics.

    ``positive_ratio`` is kept as an exact rational so ratio * committee size
    is an integer by construction; ``entropy`` is the base-2 binary entropy
    of that ratio.
    """

    pair_id: str
    votes: tuple[int, ...]
    positive_ratio: Fraction
    entropy: float

    def __post_init__(self):
        for vote in self.votes:
            validate_label(vote)
        if not 0.0 <= self.entropy <= 1.0:
            raise ValidationError(f"entropy out of range: {self.entropy}")

    @classmethod
    def from_votes(cls, pair_id: str, votes: Sequence[int]) -> "UncertaintyScore":
        ratio = positive_ratio(votes)
        return cls(pair_id=pair_id, votes=tuple(votes), positive_ratio=ratio, entropy=entropy(ratio))


def positive_ratio(votes: Sequence[int]) -> Fraction:
    """Fraction of positive (match) votes in a committee.

    Exact rational arithmetic, so ``positive_ratio(v) * len(v)`` is always an
    integer.
    """
    if not votes:
        raise ValidationError("empty committee")
    for vote in votes:
        validate_label(vote)
    return Fraction(sum(1 for v in votes if v == MATCH), len(votes))


def entropy(r: float | Fraction) -> float:
    """Binary entropy of a positive ratio, in bits.

    Base 2 normalizes the value to [0, 1] with the maximum 1.0 at r = 0.5.
    The 0 * log 0 terms are taken as 0 by continuity, so the endpoints map
    to exactly 0.0.
    """
    x = float(r)
    if math.isnan(x) or x < 0.0 or x > 1.0:
        raise ValidationError(f"ratio outside [0, 1]: {r!r}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -(x * math.log2(x) + (1.0 - x) * math.log2(1.0 - x))


def temperature_schedule(m: int) -> list[float]:
    """Evenly spaced committee temperatures from 0 to 1.

    With fewer than two runs there is no disagreement to measure, so m < 2
    is rejected.
    """
    if m < 2:
        raise ValidationError(f"committee too small: m={m} (need at least 2)")
    return [i / (m - 1) for i in range(m)]


def ordered_selection_count(n: int, k: int) -> int:
    """Number of ordered selections of k items out of n, without replacement.

    Python integers are arbitrary precision, so the product cannot silently
    wrap; out-of-domain arguments are rejected instead.
    """
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if k > n:
        raise ValidationError(f"k must not exceed n, got k={k} > n={n}")
    return math.perm(n, k)
