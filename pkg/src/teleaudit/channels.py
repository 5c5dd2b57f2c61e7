"""Catalog of the entangled resource states used by the builtin scenarios.

Each entry fixes the qubit labels and the default sender/receiver split;
scenarios that hand parties around (two-qubit transfers) relabel and
re-assign through the helpers below.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

from .statevec import LabelError, PureState, from_terms


@dataclass(frozen=True, eq=False)
class ResourceState:
    """A named entangled channel plus the label sets Alice and Bob hold."""

    name: str
    state: PureState
    alice: tuple[int, ...]
    bob: tuple[int, ...]

    def __post_init__(self):
        alice = tuple(int(x) for x in self.alice)
        bob = tuple(int(x) for x in self.bob)
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)
        if set(alice) & set(bob):
            raise LabelError(f"parties overlap: {alice} / {bob}")
        if set(alice) | set(bob) != set(self.state.labels):
            raise LabelError(
                f"parties {alice}+{bob} do not partition register {self.state.labels}"
            )


S2 = 1.0 / sqrt(2.0)
S3 = 1.0 / sqrt(3.0)
S5 = 1.0 / sqrt(5.0)

_CATALOG: dict[str, tuple[tuple[int, ...], dict[str, float], tuple[int, ...], tuple[int, ...]]] = {
    # name: (labels, terms, alice, bob)
    "bell": ((2, 3), {"00": S2, "11": S2}, (2,), (3,)),
    "ghz3": ((2, 3, 4), {"000": S2, "111": S2}, (2, 3), (4,)),
    "w3": ((2, 3, 4), {"100": S3, "010": S3, "001": S3}, (2, 3), (4,)),
    "w3-variant": ((2, 3, 4), {"101": S3, "110": S3, "011": S3}, (2, 3), (4,)),
    "p1": (
        (3, 4, 5, 6),
        {"0001": 0.5, "0010": 0.5, "0100": 0.5, "1000": 0.5},
        (3, 4, 5),
        (6,),
    ),
    "p2": (
        (3, 4, 5, 6),
        {"0000": S5, "1111": S5, "0011": S5, "0101": S5, "0110": S5},
        (3, 4, 5),
        (6,),
    ),
    "p3": (
        (3, 4, 5, 6),
        {"0000": 0.5, "0101": 0.5, "1000": 0.5, "1110": 0.5},
        (3, 4, 5),
        (6,),
    ),
    "p4": (
        (3, 4, 5, 6),
        {"0000": 0.5, "1011": 0.5, "1101": 0.5, "1110": 0.5},
        (3, 4, 5),
        (6,),
    ),
}

CHANNEL_NAMES = tuple(sorted(_CATALOG))


def make(name: str) -> ResourceState:
    """Build a catalog channel with its default labels and party assignment."""
    try:
        labels, terms, alice, bob = _CATALOG[name]
    except KeyError:
        raise LabelError(f"unknown channel {name!r}; known: {', '.join(CHANNEL_NAMES)}") from None
    return ResourceState(name, from_terms(labels, terms), alice, bob)


def assign_parties(r: ResourceState, alice, bob) -> ResourceState:
    """Same state, new sender/receiver split."""
    return ResourceState(r.name, r.state, tuple(alice), tuple(bob))


def relabel(r: ResourceState, new_labels) -> ResourceState:
    """Rename the register positionally; party sets follow the renaming."""
    new_labels = tuple(int(x) for x in new_labels)
    if len(new_labels) != len(r.state.labels):
        raise LabelError(f"expected {len(r.state.labels)} labels, got {new_labels}")
    mapping = dict(zip(r.state.labels, new_labels))
    state = PureState(new_labels, r.state.amps)
    return ResourceState(
        r.name,
        state,
        tuple(mapping[l] for l in r.alice),
        tuple(mapping[l] for l in r.bob),
    )
