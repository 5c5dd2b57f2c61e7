"""Leaf classification, claim auditing, and the no-signaling invariant.

A leaf teleports iff one signed Pauli string maps the receiver's residual
state onto the input family at *every* sampled parameter point; solving
jointly is what makes the success set parameter independent.  Aggregates are
exact branch-probability sums, so claimed-versus-computed comparisons run at
tight tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from . import statevec
from .protocol import (
    InputFamily,
    Leaf,
    OutcomeRecord,
    Protocol,
    execute,
    pre_send_step_count,
    prefix_branches,
    sample_params,
)
from .statevec import (
    DensityMatrix,
    InvariantViolation,
    LabelError,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    I2,
    PureState,
    apply_1q,
    trace_distance,
)

SUCCESS_TOL = 1e-9
CLAIM_TOL = 1e-6
NO_SIGNALING_TOL = 1e-9
PRESENT_TOL = 1e-14

_PAULIS = (("I", I2), ("X", PAULI_X), ("Y", PAULI_Y), ("Z", PAULI_Z))
_PHASES = ((1 + 0j, ""), (1j, "i"), (-1 + 0j, "-"), (-1j, "-i"))


@dataclass(frozen=True)
class CorrectionOp:
    """Signed Pauli string acting on the receiver's labels."""

    paulis: tuple[str, ...]
    phase: complex

    def __str__(self):
        prefix = {1 + 0j: "", 1j: "i", -1 + 0j: "-", -1j: "-i"}[self.phase]
        return prefix + "⊗".join(self.paulis)

    def apply(self, s: PureState) -> PureState:
        out = s
        for label, name in zip(s.labels, self.paulis):
            if name != "I":
                out = apply_1q(out, label, dict(_PAULIS)[name])
        if self.phase != 1:
            amps = out.amps * self.phase
            out = PureState(out.labels, amps)
        return out


def solve_correction(states: list[PureState | None], targets: list[PureState]):
    """Search 4^k Pauli strings for one reaching fidelity 1 at every point.

    ``states[i]`` may be None where the leaf has no support at point ``i``;
    those points are skipped.  Strings are tried in lexicographic I<X<Y<Z
    order (positions follow the target's label order) and the winning string
    gets the quartic phase that aligns the corrected state with the target
    vector (phase 1 when none aligns, since fidelity itself is phase blind).
    """
    pairs = []
    for s, t in zip(states, targets):
        if s is None:
            continue
        if set(s.labels) != set(t.labels):
            raise LabelError(f"state labels {s.labels} do not match target {t.labels}")
        if s.labels != t.labels:
            s = s.reorder(t.labels)
        pairs.append((s.amps, t.amps))
    if not pairs:
        return None, None
    k = len(targets[0].labels) if targets[0] is not None else 0
    for i, t in enumerate(targets):
        if states[i] is not None:
            k = len(t.labels)
            break
    mats = dict(_PAULIS)
    for combo in itertools.product("IXYZ", repeat=k):
        full = mats[combo[0]]
        for name in combo[1:]:
            full = np.kron(full, mats[name])
        fids = [abs(np.vdot(t, full @ s)) ** 2 for s, t in pairs]
        if all(f >= 1.0 - SUCCESS_TOL for f in fids):
            phase = _solve_phase(full, pairs)
            return CorrectionOp(combo, phase), min(fids)
    return None, None


def _solve_phase(full: np.ndarray, pairs) -> complex:
    for value, _ in _PHASES:
        if all(np.linalg.norm(value * (full @ s) - t) <= 1e-6 for s, t in pairs):
            return value
    return 1 + 0j


# ---------------------------------------------------------------------------
# Joint leaf verdicts across parameter points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeafVerdict:
    outcomes: OutcomeRecord
    probabilities: tuple[float, ...]  # one entry per sampled point
    correction: CorrectionOp | None
    success: bool
    min_fidelity: float | None
    failed_by_protocol: bool

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(o for _, o in self.outcomes)


@dataclass(frozen=True)
class Aggregate:
    per_point: tuple[float, ...]
    mean: float
    min: float
    max: float


@dataclass(frozen=True)
class ClaimAudit:
    claimed: float
    citation: str
    computed: float
    delta: float
    match: bool


@dataclass(frozen=True)
class CbitAudit:
    declared: int | None
    minimum: int


@dataclass(frozen=True)
class RegainReport:
    leaves: tuple[LeafVerdict, ...]
    unconditional: Aggregate
    conditional: Aggregate
    claim_conditional: ClaimAudit | None
    claim_unconditional: ClaimAudit | None


@dataclass(frozen=True)
class VerificationReport:
    scenario: str
    points: tuple[tuple[complex, ...], ...]
    leaves: tuple[LeafVerdict, ...]
    aggregate: Aggregate
    claim: ClaimAudit | None
    cbits: CbitAudit
    regain: RegainReport | None
    no_signaling_max: float

    @property
    def success_keys(self) -> set[tuple[str, ...]]:
        return {v.key for v in self.leaves if v.success}


def _join_leaves(trees_leaves: list[list[Leaf]]) -> list[tuple[OutcomeRecord, list[Leaf | None]]]:
    """Align leaves across parameter points by outcome record, in tree order."""
    order: list[OutcomeRecord] = []
    seen: dict[OutcomeRecord, list[Leaf | None]] = {}
    n = len(trees_leaves)
    for i, leaves in enumerate(trees_leaves):
        for leaf in leaves:
            if leaf.outcomes not in seen:
                seen[leaf.outcomes] = [None] * n
                order.append(leaf.outcomes)
            seen[leaf.outcomes][i] = leaf
    return [(o, seen[o]) for o in order]


def _verdicts(joined, points, family: InputFamily, holder_order_of) -> list[LeafVerdict]:
    verdicts = []
    for outcomes, per_point in joined:
        probs = tuple(l.probability if l is not None else 0.0 for l in per_point)
        aborted = any(l.aborted for l in per_point if l is not None)
        states: list[PureState | None] = []
        targets: list[PureState] = []
        for point, leaf in zip(points, per_point):
            if leaf is None or leaf.bob_state is None:
                states.append(None)
                targets.append(None)  # placeholder, filtered in solve
                continue
            states.append(leaf.bob_state)
            targets.append(family.state(holder_order_of(leaf.bob_state), point))
        if aborted or all(s is None for s in states):
            verdicts.append(LeafVerdict(outcomes, probs, None, False, None, aborted))
            continue
        correction, min_fid = solve_correction(states, targets)
        verdicts.append(
            LeafVerdict(outcomes, probs, correction, correction is not None, min_fid, False)
        )
    return verdicts


def _aggregate(verdicts, n_points) -> Aggregate:
    per = [0.0] * n_points
    for v in verdicts:
        if v.success:
            for i, p in enumerate(v.probabilities):
                per[i] += p
    per = tuple(per)
    return Aggregate(per, float(np.mean(per)), float(np.min(per)), float(np.max(per)))


def _audit(claimed: float, citation: str, computed: float, tolerance: float) -> ClaimAudit:
    delta = abs(computed - claimed)
    return ClaimAudit(claimed, citation, computed, delta, delta <= tolerance)


def _min_cbits(verdicts) -> int:
    strings = {v.correction.paulis for v in verdicts if v.success and v.correction is not None}
    if len(strings) <= 1:
        return 0
    return ceil(log2(len(strings)))


def verify_scenario(
    p: Protocol,
    n_samples: int = 6,
    seed: int = 7,
    tolerance: float = CLAIM_TOL,
    points=None,
) -> VerificationReport:
    """Execute at fixed plus sampled points, classify every leaf, audit claims.

    ``points`` overrides the sampling entirely (used for explicit --params
    runs); corrections are then solved only at those points.
    """
    if points is None:
        points = tuple(sample_params(p.family, n_samples, seed))
    else:
        points = tuple(tuple(complex(v) for v in pt) for pt in points)
    trees = [execute(p, pt) for pt in points]
    for t in trees:
        t.check_total_probability()

    joined = _join_leaves([list(t.leaves) for t in trees])
    verdicts = tuple(_verdicts(joined, points, p.family, lambda s: s.labels))
    agg = _aggregate(verdicts, len(points))

    claim = None
    if p.claim is not None:
        claim = _audit(p.claim.probability, p.claim.citation, agg.mean, tolerance)

    cbits = CbitAudit(p.declared_cbits(), _min_cbits(verdicts))

    regain = None
    if p.regain is not None:
        rjoined = _join_leaves([list(t.regain_leaves) for t in trees])
        rverdicts = tuple(_verdicts(rjoined, points, p.family, lambda s: s.labels))
        runcond = _aggregate(rverdicts, len(points))
        abort_mass = []
        for t in trees:
            abort_mass.append(
                sum(s.probability for s in t.aborts if s.trigger == p.regain.on)
            )
        cond_per = tuple(
            u / m if m > PRESENT_TOL else 0.0 for u, m in zip(runcond.per_point, abort_mass)
        )
        rcond = Aggregate(
            cond_per, float(np.mean(cond_per)), float(np.min(cond_per)), float(np.max(cond_per))
        )
        claim_c = claim_u = None
        if p.regain.claim is not None:
            c = p.regain.claim
            claim_c = _audit(c.probability, c.citation, rcond.mean, tolerance)
            if not c.conditional:
                # reading ambiguous in the source: audit both interpretations
                claim_u = _audit(c.probability, c.citation, runcond.mean, tolerance)
        regain = RegainReport(rverdicts, runcond, rcond, claim_c, claim_u)

    ns_max = no_signaling_check(p, points) if len(points) >= 2 else 0.0
    return VerificationReport(
        p.name, points, verdicts, agg, claim, cbits, regain, ns_max
    )


# ---------------------------------------------------------------------------
# No-signaling
# ---------------------------------------------------------------------------

def _bob_marginal(p: Protocol, point, n_steps: int) -> DensityMatrix:
    """Receiver's unconditional reduced state after the first ``n_steps`` steps."""
    return _bob_marginals(p, point, n_steps)[-1]


def _bob_marginals(p: Protocol, point, n_steps: int) -> list[DensityMatrix]:
    """Receiver marginals after every prefix length 0..n_steps, one pass."""
    bob = p.bob_labels
    dim = 2 ** len(bob)
    out = []
    for branches in prefix_branches(p, point, n_steps):
        rho = np.zeros((dim, dim), dtype=complex)
        for prob, state in branches:
            rho += prob * statevec.reduce(state, bob).entries
        out.append(DensityMatrix(bob, rho))
    return out


def _scan_prefixes(protocol_for_point, points, n_prefixes: int) -> float:
    per_point = [_bob_marginals(protocol_for_point(pt), pt, n_prefixes) for pt in points]
    worst = 0.0
    for k in range(n_prefixes + 1):
        for a, b in itertools.combinations((m[k] for m in per_point), 2):
            worst = max(worst, trace_distance(a, b))
    return worst


def no_signaling_check(p: Protocol, points) -> float:
    """Max pairwise trace distance of Bob's marginal over every pre-send prefix."""
    if len(points) < 2:
        raise ValueError("need at least two parameter points")
    return _scan_prefixes(lambda _: p, points, pre_send_step_count(p))


def assert_no_signaling(p: Protocol, points):
    worst = no_signaling_check(p, points)
    if worst >= NO_SIGNALING_TOL:
        raise InvariantViolation(
            f"no-signaling violated for {p.name}: max trace distance {worst:.3e}"
        )
    return worst


# ---------------------------------------------------------------------------
# Discrepancy ledger
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LedgerRow:
    scenario: str
    claimed: float | None
    computed: float
    delta: float | None
    match: bool | None
    citation: str


@dataclass(frozen=True)
class DiscrepancyLedger:
    rows: tuple[LedgerRow, ...]

    @property
    def mismatches(self) -> tuple[LedgerRow, ...]:
        return tuple(r for r in self.rows if r.match is False)


def ledger(reports: list[VerificationReport]) -> DiscrepancyLedger:
    """Fold verification reports into claimed-versus-computed rows, sorted by name."""
    rows = []
    for rep in sorted(reports, key=lambda r: r.scenario):
        if rep.claim is not None:
            rows.append(
                LedgerRow(
                    rep.scenario,
                    rep.claim.claimed,
                    rep.claim.computed,
                    rep.claim.delta,
                    rep.claim.match,
                    rep.claim.citation,
                )
            )
        else:
            rows.append(
                LedgerRow(rep.scenario, None, rep.aggregate.mean, None, None, "none stated")
            )
        if rep.regain is not None:
            for kind, audit, agg in (
                ("conditional", rep.regain.claim_conditional, rep.regain.conditional),
                ("unconditional", rep.regain.claim_unconditional, rep.regain.unconditional),
            ):
                name = f"{rep.scenario} regain ({kind})"
                if audit is not None:
                    rows.append(
                        LedgerRow(
                            name, audit.claimed, audit.computed, audit.delta, audit.match,
                            audit.citation,
                        )
                    )
                else:
                    rows.append(LedgerRow(name, None, agg.mean, None, None, "none stated"))
    return DiscrepancyLedger(tuple(rows))
