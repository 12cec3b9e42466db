"""Declarative instance specs and the seeded verification corpus.

A compose spec names a field, a window, torsion blocks, cohomology
multiplicities, and an optional gauge seed; composing it builds the
block-diagonal model and optionally scrambles it.  The corpus generator
draws bounded pseudorandom specs deterministically from integer seeds.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .fields import field_from_tag
from .functors import (
    FunctorData,
    direct_sum_many,
    gauge_scramble,
    generator_h0_torsion,
    generator_h1,
)
from .sheaves import TorsionSheaf, enumerate_points
from .structure import Decomposition


@dataclass
class ComposeSpec:
    field_tag: str
    lo: int
    hi: int
    torsion: TorsionSheaf
    h1: dict
    gauge_seed: int | None = None

    def violations(self):
        out = []
        if self.hi < 2:
            out.append("window top must be at least 2")
        if self.h1:
            need = min(-i - 3 for i in self.h1)
            if self.lo > need:
                out.append(
                    f"window bottom {self.lo} too shallow for the requested "
                    f"summands (need at most {need})")
        if any(l < 1 for l in self.h1.values()):
            out.append("multiplicities must be positive")
        if self.lo > self.hi:
            out.append("empty window")
        return out

    def expected_decomposition(self) -> Decomposition:
        return Decomposition(self.torsion, dict(self.h1))

    def to_json(self):
        data = {
            "field": self.field_tag,
            "lo": self.lo,
            "hi": self.hi,
            "torsion": self.torsion.to_json(),
            "h1": [{"i": int(i), "l": int(l)}
                   for i, l in sorted(self.h1.items())],
        }
        if self.gauge_seed is not None:
            data["gauge_seed"] = int(self.gauge_seed)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "ComposeSpec":
        field = field_from_tag(data["field"])
        torsion = TorsionSheaf.from_json(field, data.get("torsion", []))
        h1 = {}
        for entry in data.get("h1", []):
            i, l = int(entry["i"]), int(entry["l"])
            h1[i] = h1.get(i, 0) + l
        seed = data.get("gauge_seed")
        return cls(data["field"], int(data["lo"]), int(data["hi"]),
                   torsion, h1, None if seed is None else int(seed))


def compose_functor(spec: ComposeSpec) -> FunctorData:
    """Build the composed model; deterministic given the gauge seed."""
    bad = spec.violations()
    if bad:
        raise ValueError("; ".join(bad))
    field = field_from_tag(spec.field_tag)
    parts = []
    for i in sorted(spec.h1):
        parts.extend(generator_h1(field, i, spec.lo, spec.hi)
                     for _ in range(spec.h1[i]))
    parts.append(generator_h0_torsion(spec.torsion, spec.lo, spec.hi))
    f = direct_sum_many(field, spec.lo, spec.hi, parts)
    if spec.gauge_seed is not None:
        f = gauge_scramble(f, spec.gauge_seed)
    return f


_BLOCK_COUNT = ((0, 20), (1, 35), (2, 30), (3, 15))
_MULT = ((1, 50), (2, 30), (3, 20))
_H1_COUNT = ((0, 25), (1, 35), (2, 25), (3, 15))
_H1_MULT = ((1, 70), (2, 30))


def _weighted(rng, table):
    total = sum(w for _, w in table)
    roll = rng.randrange(total)
    for value, w in table:
        if roll < w:
            return value
        roll -= w
    raise AssertionError("unreachable")


def corpus_spec(seed: int, index: int) -> ComposeSpec:
    """The index-th bounded pseudorandom spec of the seeded corpus.

    Bounds: at most 3 torsion blocks of multiplicity at most 3 at points
    from the canonical enumeration prefix of length 6; at most 3 summand
    indices in [-3, 1] with multiplicity at most 2; window
    [-(8 + deepest summand), 4].
    """
    rng = random.Random(int(seed) * 1_000_003 + int(index))
    field = field_from_tag("Q")
    prefix = list(itertools.islice(enumerate_points(field), 6))
    blocks = []
    for _ in range(_weighted(rng, _BLOCK_COUNT)):
        blocks.append((prefix[rng.randrange(6)], _weighted(rng, _MULT)))
    torsion = TorsionSheaf(field, blocks)
    h1 = {}
    count = _weighted(rng, _H1_COUNT)
    for i in rng.sample(range(-3, 2), count):
        h1[i] = _weighted(rng, _H1_MULT)
    depth = max([0] + [-i for i in h1])
    lo, hi = -(8 + depth), 4
    gauge_seed = rng.randrange(2**31)
    return ComposeSpec("Q", lo, hi, torsion, h1, gauge_seed)
