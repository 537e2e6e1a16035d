"""Varying-coefficient regression with adaptively selected B-spline knots.

The fitting pipeline orders the data by the conditioner, selects knots as
penalized segmentation boundaries via dynamic programming, and represents
every coefficient function in a clamped B-spline basis. A two-stage group
lasso handles sparse high-dimensional predictor selection, and replication
harnesses reproduce the benchmark simulation studies.
"""

from .basis import BSplineBasis, bspline_design, bspline_eval, bspline_matrix
from .bench import mse_beta, mse_of_fit, run_table1, run_table2
from .data import Dataset
from .knots import (
    DEFAULT_LAMBDA0_GRID,
    KnotSet,
    SegmentCostTable,
    build_cost_table,
    dp_backtrace,
    dp_forward,
    min_segment_size,
    order_by_u,
    segment_loss,
    select_knots,
    select_knots_path,
    select_knots_segmentation_bic,
)
from .lsq import OlsResult, ols_fit
from .model import (
    PredictorKnots,
    VCFit,
    eval_coefficients,
    fit_from_json,
    fit_one_step,
    fit_spline,
    fit_to_json,
    fit_two_step,
    predict,
    residual_without,
)
from .panel import PanelTable, ingest_csv, lag_scan, preprocess, write_panel_csv
from .select import (
    GroupKernel,
    GroupLassoFit,
    SelectionReport,
    adaptive_group_lasso,
    group_kernel,
    group_lasso,
    group_lasso_path,
    kkt_residuals,
    lambda_max,
    marginal_knots,
    select_variables,
)
from .simulate import (
    LongitudinalDesign,
    SimulatedData,
    simulate_lagged_panel,
    simulate_tang,
    simulate_wei,
)

__version__ = "0.1.0"
