"""High-order Moreau envelope smoothing and proximal-point optimization."""

from .core import (
    OBJECTIVES,
    Candidate,
    Objective,
    ProxConfig,
    ProxSolution,
    Trace,
    get_objective,
    make_abs_shift,
    make_negexp,
    make_ncr1,
    make_ncr2,
    make_notcalm,
    make_quartic,
)
from .envelope import (
    UnboundedEnvelopeError,
    eval_home,
    eval_hope,
    home_gradient,
    multiplicity,
    prox_from_gradient,
    reg_objective,
)
from .hippa import HippaResult, criticality_bound, iteration_bound, run_hippa
from .baselines import run_nm_direct, run_sg_dss, run_sg_gss
from .nelder_mead import NMResult, SimplexState, initial_simplex, nelder_mead
from .analysis import (
    KappaEval,
    ProbeReport,
    branch_switch_root,
    check_p_calm,
    check_prox_bounded,
    holder_fit,
    kappa,
    single_valuedness_probe,
    sublevel_containment,
    verify_basic_ineq,
    verify_lemma22,
)
from .bench import (
    ExperimentConfig,
    Report,
    export_traces,
    load_report,
    relative_error,
    run_experiment,
    run_preset,
    save_report,
)

__version__ = "0.1.0"
