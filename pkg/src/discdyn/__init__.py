"""Step-response identification of discussion dynamics.

Threads of posts are read as unit-step experiments: the initial post is the
step, the cumulative reply count is the response. FOPDT and logistic models
are fitted to that response; Zipf fits over thread sizes give a prior on the
gain of new discussions.
"""

from .identify import (
    FitReport,
    area_fit,
    characteristic_time,
    estimate_gain,
    fit,
    least_squares_fit,
    logistic_fit,
    predict_count_at,
    two_point_fit,
)
from .ingest import (
    DiscussionThread,
    PostRecord,
    StepResponseSeries,
    build_step_response,
    detect_steady_state,
    group_threads,
    parse_posts,
)
from .response_models import (
    FopdtModel,
    LogisticModel,
    fopdt_rate,
    fopdt_step_response,
    format_transfer_function,
    logistic_value,
    parse_transfer_function,
)
from .simulate import SimulationConfig, sample_response, simulate_thread
from .zipf import PowerLawFit, SizeHistogram, fit_power_law, gain_prior, histogram_from_threads

__version__ = "0.1.0"
