"""Design and certification of stabilizing delayed feedback for linear
time-delay systems via partial pole placement."""

__version__ = "0.1.0"

from .errors import CapExceeded, DelayLabError, InvalidInput, NumericFailure
from .quasipoly import Quasipolynomial
from .placement import (
    CrridResult,
    PlacementResult,
    solve_control_mid,
    solve_crrid,
    solve_generic_mid,
)
from .admissibility import (
    AdmissibilityGrid,
    MaxDelayResult,
    compute_grid,
    max_stabilizable_tau,
    relation_value,
    solve_for_s0,
    solve_for_tau,
)
from .spectrum import (
    DominanceCertificate,
    RootEstimate,
    SensitivityTrace,
    SpectralWindow,
    Spectrum,
    check_dominance,
    compute_spectrum,
    count_roots,
    imaginary_bound,
    sensitivity_sweep,
)
from .factorization import (
    FactorizedForm,
    deflate,
    hypergeometric_form,
    integral_form,
    kummer_M,
)
from .dde_sim import (
    HistorySpec,
    SimulationResult,
    estimate_decay_rate,
    simulate,
)
from .examples import (
    ExampleSystem,
    GainMap,
    example_to_problem,
    get_example,
    list_examples,
    recover_gains,
)
from .report import (
    MODE_ORDER,
    DataTableBlock,
    FigureBlock,
    KeyValueBlock,
    ReportDocument,
    TextBlock,
    build_report,
    parse_json,
    render_html,
    render_json,
)
