"""Treatment spillover estimation on endogenous networks.

Units are randomly assigned to treatment while the network deciding who
is actually exposed to whom is observational.  The package provides the
sample estimators (least squares, instrumented, complier-weighted) with
the first peer's treatment as instrument, a randomization test of the
sharp no-spillover null, seeded simulation studies, and an exact
enumeration engine that certifies the closed-form estimand
characterizations on small finite populations.
"""

from .data import (
    ExposureMap,
    NetworkDataset,
    PairDataset,
    counterfactual_exposure,
    exposure,
    spillover_pair,
)
from .dgp import (
    NetworkDgpConfig,
    PairDgpConfig,
    gen_network,
    gen_pair,
    gen_pair_homogeneous,
)
from .errors import (
    DataError,
    DegenerateArmError,
    EstimationError,
    InsufficientCompliersError,
    InvalidConfigError,
    MissingLinksError,
    RankDeficientError,
    SingularDesignError,
    SpillnetError,
    WeakFirstStageError,
)
from .estimators import (
    Fit,
    ols_fit,
    plug_in_variance,
    spillover_design_variance,
    tsls_fit,
    wls_fit,
)
from .harness import (
    McEstimationReport,
    McFrtReport,
    Table1Summary,
    mc_estimation,
    mc_frt,
    table1_replication,
)
from .oracle import (
    EstimandReport,
    NetworkPopulationSpec,
    NetworkUnitAtom,
    NetworkUnitSpec,
    PairPopulationSpec,
    PairUnitType,
    network_enumerate,
    network_theorem_values,
    pair_closed_forms,
    pair_enumerate,
    random_network_spec,
    random_pair_spec,
    sample_network,
    sample_pair,
)
from .randomization import FrtResult, frt, statistic_itt, statistic_ittc

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # data
    "ExposureMap",
    "NetworkDataset",
    "PairDataset",
    "counterfactual_exposure",
    "exposure",
    "spillover_pair",
    # estimators
    "Fit",
    "ols_fit",
    "tsls_fit",
    "wls_fit",
    "plug_in_variance",
    "spillover_design_variance",
    # randomization
    "FrtResult",
    "frt",
    "statistic_itt",
    "statistic_ittc",
    # oracle
    "EstimandReport",
    "PairPopulationSpec",
    "PairUnitType",
    "NetworkPopulationSpec",
    "NetworkUnitSpec",
    "NetworkUnitAtom",
    "pair_enumerate",
    "pair_closed_forms",
    "network_enumerate",
    "network_theorem_values",
    "random_pair_spec",
    "random_network_spec",
    "sample_pair",
    "sample_network",
    # dgp
    "PairDgpConfig",
    "NetworkDgpConfig",
    "gen_pair",
    "gen_network",
    "gen_pair_homogeneous",
    # harness
    "McEstimationReport",
    "McFrtReport",
    "Table1Summary",
    "mc_estimation",
    "mc_frt",
    "table1_replication",
    # errors
    "SpillnetError",
    "DataError",
    "MissingLinksError",
    "EstimationError",
    "RankDeficientError",
    "WeakFirstStageError",
    "InsufficientCompliersError",
    "DegenerateArmError",
    "SingularDesignError",
    "InvalidConfigError",
]
