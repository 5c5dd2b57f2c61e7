"""Pure-state teleportation-protocol simulator and claim-audit engine."""

from .channels import ResourceState, assign_parties, make, relabel
from .protocol import (
    BranchTree,
    InputFamily,
    Leaf,
    Protocol,
    execute,
    get_family,
    parse_protocol,
    sample_params,
    serialize_protocol,
)
from .scenarios import SCENARIO_NAMES, ScenarioDef, all_builtins, builtin
from .statevec import (
    Branch,
    DensityMatrix,
    MeasurementBasis,
    PureState,
    apply_1q,
    apply_cnot,
    fidelity,
    measure,
    reduce,
    tensor,
)
from .verify import (
    CorrectionOp,
    DiscrepancyLedger,
    LeafVerdict,
    VerificationReport,
    ledger,
    no_signaling_check,
    solve_correction,
    verify_scenario,
)

__version__ = "0.1.0"
