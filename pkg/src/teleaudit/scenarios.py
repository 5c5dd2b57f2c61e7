"""Builtin teleportation scenarios with their externally claimed probabilities.

Each entry transcribes one published transfer procedure onto a catalog
channel: sender-side entangling gates, the measurement cascade, abort rules,
and (where the source states one) the claimed success probability plus the
printed success-outcome set.  Claims are audit inputs, not trusted values;
``verify`` recomputes everything by enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .channels import assign_parties, make, relabel
from .protocol import (
    AbortOn,
    Cases,
    Claim,
    Cnot,
    H,
    Measure,
    Protocol,
    Regain,
    Send,
    get_family as _family,
    validate,
)


@dataclass(frozen=True)
class ScenarioDef:
    protocol: Protocol
    description: str
    # outcome sets the source prints, keyed "main"/"regain"; None when unstated
    stated_success: dict | None = None
    notes: str = ""


def _bell_1q() -> ScenarioDef:
    proto = Protocol(
        name="bell-1q",
        resource=make("bell"),
        family=_family("single"),
        input_labels=(1,),
        steps=(Cnot(1, 2), H(1), Measure((1, 2)), Send(2)),
        claim=Claim(1.0, "deterministic relay through two classical bits"),
    )
    return ScenarioDef(validate(proto), "single qubit through the two-qubit Bell channel")


def _ghz_1q() -> ScenarioDef:
    proto = Protocol(
        name="ghz-1q",
        resource=make("ghz3"),
        family=_family("single"),
        input_labels=(1,),
        steps=(Cnot(1, 2), H(1), H(3), Measure((1, 2, 3))),
        claim=Claim(1.0, "claimed deterministic on this channel"),
    )
    return ScenarioDef(
        validate(proto),
        "single qubit through the three-qubit GHZ channel",
        notes="second sender-side Hadamard is required for the deterministic claim to hold",
    )


def _w_1q() -> ScenarioDef:
    proto = Protocol(
        name="w-1q",
        resource=make("w3"),
        family=_family("single"),
        input_labels=(1,),
        steps=(Cnot(1, 2), H(1), Measure((1, 2, 3))),
        claim=Claim(0.5, "claimed success chance: one half"),
    )
    return ScenarioDef(
        validate(proto),
        "single qubit through the three-qubit W channel",
        stated_success={"main": {("010",), ("000",), ("110",), ("100",)}},
    )


def _w_2q() -> ScenarioDef:
    resource = assign_parties(relabel(make("w3"), (3, 4, 5)), (3,), (4, 5))
    proto = Protocol(
        name="w-2q",
        resource=resource,
        family=_family("twoqubit-nonmax"),
        input_labels=(1, 2),
        steps=(
            Cnot(2, 3),
            Cnot(1, 3),
            Measure((3,)),
            AbortOn((3,), "0"),
            H(1),
            Measure((2,)),
            AbortOn((2,), "1"),
            Measure((1,)),
        ),
        regain=Regain(
            on=AbortOn((3,), "0"),
            steps=(H(5), Measure((4, 5)), Send(1)),
            holder=(1, 2),
            claim=Claim(0.5, "claimed recovery chance: one half, one classical bit", True),
        ),
        claim=Claim(0.25, "claimed success chance: one quarter"),
    )
    return ScenarioDef(
        validate(proto),
        "partially entangled qubit pair through the W channel, with recovery on failure",
        stated_success={"regain": {("0", "00"), ("0", "01")}},
    )


def _w_variant_2q() -> ScenarioDef:
    resource = assign_parties(relabel(make("w3-variant"), (3, 4, 5)), (3,), (4, 5))
    proto = Protocol(
        name="w-variant-2q",
        resource=resource,
        family=_family("twoqubit-nonmax-variant"),
        input_labels=(1, 2),
        steps=(
            Cnot(2, 3),
            Cnot(1, 3),
            Measure((3,)),
            AbortOn((3,), "1"),
            H(1),
            Measure((2,)),
            AbortOn((2,), "0"),
            Measure((1,)),
        ),
    )
    return ScenarioDef(
        validate(proto),
        "flipped-excitation pair family through the flipped W channel",
        notes="abort senses are inverted relative to w-2q; the stated ones leave no success branch",
    )


def _p1_1q() -> ScenarioDef:
    proto = Protocol(
        name="p1-1q",
        resource=make("p1"),
        family=_family("single"),
        input_labels=(1,),
        steps=(Cnot(1, 5), Cnot(3, 4), Measure((1, 3), "bell"), Measure((4, 5), "bell"), Send(1)),
        claim=Claim(0.5, "claimed success chance: one half"),
    )
    matched = {
        (a, b)
        for a in ("Φ+", "Φ-", "Ψ+", "Ψ-")
        for b in ("Φ+", "Φ-", "Ψ+", "Ψ-")
        if a[0] == b[0]
    }
    return ScenarioDef(
        validate(proto),
        "single qubit through the four-qubit W channel via two Bell measurements",
        stated_success={"main": matched},
    )


def _p1_2q() -> ScenarioDef:
    resource = assign_parties(make("p1"), (3, 4), (5, 6))
    proto = Protocol(
        name="p1-2q",
        resource=resource,
        family=_family("twoqubit-nonmax"),
        input_labels=(1, 2),
        steps=(
            Cnot(1, 4),
            Cnot(2, 4),
            Cnot(3, 4),
            Measure((4,)),
            AbortOn((4,), "0"),
            H(2),
            Measure((1, 2, 3)),
        ),
        regain=Regain(
            on=AbortOn((4,), "0"),
            steps=(Measure((3,)), AbortOn((3,), "1"), H(6), Measure((5, 6)), Send(1)),
            holder=(1, 2),
            claim=Claim(0.25, "claimed recovery chance: one quarter, one classical bit"),
        ),
    )
    return ScenarioDef(
        validate(proto),
        "partially entangled qubit pair through the four-qubit W channel, with recovery",
        stated_success={
            "main": {("1", "000"), ("1", "010")},
            "regain": {("0", "0", "00"), ("0", "0", "01")},
        },
    )


def _p2_1q() -> ScenarioDef:
    proto = Protocol(
        name="p2-1q",
        resource=make("p2"),
        family=_family("single"),
        input_labels=(1,),
        steps=(
            Cnot(1, 4),
            H(1),
            Measure((3,)),
            AbortOn((3,), "1"),
            Measure((4,)),
            Measure((1, 5)),
            Send(2),
        ),
    )
    return ScenarioDef(
        validate(proto),
        "single qubit through the five-term symmetric four-qubit channel",
    )


def _p2_2q() -> ScenarioDef:
    resource = assign_parties(make("p2"), (3, 4), (5, 6))
    proto = Protocol(
        name="p2-2q",
        resource=resource,
        family=_family("twoqubit-symmetric"),
        input_labels=(1, 2),
        steps=(
            Cnot(1, 4),
            Cnot(2, 4),
            Measure((4,)),
            Measure((3,)),
            Cases(
                (3, 4),
                (
                    ("00", (Measure((1, 2), "pm"),)),
                    ("01", (H(2), Measure((1, 2)))),
                ),
            ),
        ),
    )
    return ScenarioDef(
        validate(proto),
        "symmetric two-qubit family through the five-term channel, outcome-routed",
        stated_success={"h-route": {"00", "01"}},
        notes="outcomes 10/11 of the routed measurement also admit corrections by symmetry",
    )


def _p3_1q() -> ScenarioDef:
    proto = Protocol(
        name="p3-1q",
        resource=make("p3"),
        family=_family("single"),
        input_labels=(1,),
        steps=(Cnot(1, 3), Cnot(1, 4), H(1), Measure((1, 3, 4, 5))),
        claim=Claim(1.0 / 3.0, "claimed success chance: one third"),
    )
    return ScenarioDef(
        validate(proto),
        "single qubit through the asymmetric four-qubit channel, receiver on the last qubit",
        stated_success={"main": {("0000",), ("1000",), ("0011",), ("1011",)}},
        notes="stated set and chance disagree with enumeration; see the audit ledger",
    )


def _p3_1q_bob4() -> ScenarioDef:
    resource = assign_parties(make("p3"), (3, 5, 6), (4,))
    proto = Protocol(
        name="p3-1q-bob4",
        resource=resource,
        family=_family("single"),
        input_labels=(1,),
        steps=(Cnot(1, 5), Cnot(1, 6), H(1), Measure((1, 3, 5, 6))),
    )
    return ScenarioDef(
        validate(proto),
        "variant with the receiver on the second channel qubit, gates read positionally",
        notes="settles which party assignment leaves fidelity-1 branches",
    )


def _p4_1q() -> ScenarioDef:
    proto = Protocol(
        name="p4-1q",
        resource=make("p4"),
        family=_family("single"),
        input_labels=(1,),
        steps=(Cnot(1, 5), H(1), Measure((1,)), AbortOn((1,), "0"), Measure((3, 4, 5))),
    )
    return ScenarioDef(
        validate(proto),
        "single qubit through the second asymmetric four-qubit channel",
    )


_BUILDERS = {
    "bell-1q": _bell_1q,
    "ghz-1q": _ghz_1q,
    "w-1q": _w_1q,
    "w-2q": _w_2q,
    "w-variant-2q": _w_variant_2q,
    "p1-1q": _p1_1q,
    "p1-2q": _p1_2q,
    "p2-1q": _p2_1q,
    "p2-2q": _p2_2q,
    "p3-1q": _p3_1q,
    "p3-1q-bob4": _p3_1q_bob4,
    "p4-1q": _p4_1q,
}

SCENARIO_NAMES = tuple(sorted(_BUILDERS))


def builtin(name: str) -> ScenarioDef:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(
            f"unknown scenario {name!r}; known: {', '.join(SCENARIO_NAMES)}"
        ) from None
    return builder()


def all_builtins() -> list[ScenarioDef]:
    return [builtin(n) for n in SCENARIO_NAMES]
