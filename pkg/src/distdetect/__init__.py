"""One-bit distributed detection: protocol engine, simulator, and bounds."""

__version__ = "0.1.0"

from .chisq import chi_square_cdf
from .protocol import (
    CALIBRATED_RULE,
    THEORY_RULE,
    LocalObservation,
    ProblemInstance,
    ProtocolRun,
    PublicCoin,
    TestKind,
    Thresholds,
    TranscriptVector,
    aggregate_counting,
    calibrate_count_threshold,
    count_threshold,
    draw_public_coin,
    local_stat_chisq,
    local_test_chisq,
    local_test_sign,
    run_protocol,
    select_regime,
    test_single_machine,
)
from .rng import RngStream, derive_stream, stream_id_for
from .simulate import (
    AlternativeSpec,
    FixedVector,
    RiskEstimate,
    estimate_level,
    estimate_risk,
    generate_observations,
    tpr_curve,
)
from .theory import (
    BoundInputs,
    TheoryConstants,
    detection_threshold,
    likelihood_ratio,
    log_likelihood_ratio,
    risk_lower_bound,
    sdpi_beta,
    theory_constants,
)
from .verify import (
    ChernoffResult,
    DominanceResult,
    SubgaussianReport,
    subgaussian_beta,
    verify_chernoff,
    verify_chisq_dominance,
    verify_subgaussian_tail,
)

__all__ = [
    "__version__",
    "chi_square_cdf",
    "CALIBRATED_RULE",
    "THEORY_RULE",
    "LocalObservation",
    "ProblemInstance",
    "ProtocolRun",
    "PublicCoin",
    "TestKind",
    "Thresholds",
    "TranscriptVector",
    "aggregate_counting",
    "calibrate_count_threshold",
    "count_threshold",
    "draw_public_coin",
    "local_stat_chisq",
    "local_test_chisq",
    "local_test_sign",
    "run_protocol",
    "select_regime",
    "test_single_machine",
    "RngStream",
    "derive_stream",
    "stream_id_for",
    "AlternativeSpec",
    "FixedVector",
    "RiskEstimate",
    "estimate_level",
    "estimate_risk",
    "generate_observations",
    "tpr_curve",
    "BoundInputs",
    "TheoryConstants",
    "detection_threshold",
    "likelihood_ratio",
    "log_likelihood_ratio",
    "risk_lower_bound",
    "sdpi_beta",
    "theory_constants",
    "ChernoffResult",
    "DominanceResult",
    "SubgaussianReport",
    "subgaussian_beta",
    "verify_chernoff",
    "verify_chisq_dominance",
    "verify_subgaussian_tail",
]
