"""Rank-one perturbations of diagonal operators: eigenvalue assignment, Jordan
chains, multiplicity certificates and spectral localization, each checked
against a dense eigensolver."""
from .assignment import (
    AssignmentResult,
    TargetSpectrum,
    confluent_cauchy_determinant,
    design_confluent,
    design_phi_given_psi,
    design_psi_given_phi,
    parse_complex,
    parse_targets,
)
from .charfn import CharFn, Zero, eval_derivative, from_pair, krein_apply, to_rational, zero_order, zeros
from .errors import (
    ConditioningError,
    ConsistencyError,
    ContractError,
    GenericityError,
    InsufficientTruncationError,
    NearEigenvalueError,
    NotAnEigenvalueError,
    OracleError,
    OrderUndeterminedError,
    PoleCollisionError,
    RankOneError,
)
from .jordan import JordanChain, certify_multiplicity, chain_resolvent_case, chain_sigma0
from .localization import asymptotics_scan, circle_counts, resolvent_region_threshold, strip_halfwidth
from .operator_model import (
    BaseOperator,
    IndexSplit,
    PerturbationPair,
    assemble_dense,
    example_decay_profile,
    example_periodic_derivative,
    reduce_h0,
    split_indices,
)
from .oracle import dense_eigenvalues, rank_multiplicity
from .verify import verify_instance

__version__ = "0.1.0"
