"""Generalized preferential attachment growth and persistent-hub analysis.

Thin python surface over the C++ core: attachment functions, phi tables, the
Malthusian solver, point-process and branching simulations, graph growth, and
the experiment suites.
"""

from ._hubsim import (  # noqa: F401
    AttachmentFunction,
    AttachmentSequence,
    ConfigError,
    ModelError,
    Phi2Class,
    PhiTable,
    ResourceError,
    RngStream,
    TableRangeError,
    check_assumptions,
    derive_stream_seed,
    forward_equations,
    generator_id,
    grow,
    hypoexp_cdf,
    martingale_path,
    mdp_rate_check,
    race,
    rho_hat,
    run_ctbp,
    run_experiment,
    simulate_xi,
    solve_lambda_star,
    uniform_tree_constants,
    __version__,
)
