"""Buffer management with bounded delay.

A laboratory for online scheduling of weighted unit jobs with deadlines:
the RMix randomized scheduler (sampled and exact-distribution forms), a
per-step numerical certificate for its competitive guarantee against an
adaptive adversary, an exact offline optimum, instance generators, and a
trace-driven simulation harness.
"""

from .analysis import (
    DEFAULT_TOLERANCE,
    RATIO_BOUND,
    CertificateRow,
    HarnessReport,
    HarnessState,
    StepCertificate,
    StepRecord,
    buffer_digest,
    expected_adv_gain,
    expected_rmix_gain,
    harness_step,
    harness_summary_rows,
    run_adaptive,
    scripted_adversary,
    step_certificate,
)
from .errors import ConfigError, HarnessError, ModelError, TraceError
from .generators import (
    GenConfig,
    SpanDist,
    WeightDist,
    generate,
    random_buffer,
    tightness_buffer,
)
from .model import (
    NUMERIC,
    ORDINAL,
    BufferState,
    DeadlineKey,
    Packet,
    StepEvent,
    Trace,
    apply_step,
    deadline_before,
    deadline_before_eq,
    heaviest,
    pareto_frontier,
)
from .offline import Schedule, opt_brute, opt_greedy, realize_deadlines
from .schedulers import (
    SCHEDULERS,
    Atom,
    SchedulerDecision,
    SelectionDistribution,
    edf_choose,
    get_scheduler,
    greedy_choose,
    rmix_choose,
    rmix_distribution,
    rmix_sample,
)
from .simulate import RunReport, build_report, opt_value_of, simulate_many, simulate_trial
from .traceio import read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "NUMERIC",
    "ORDINAL",
    "RATIO_BOUND",
    "DEFAULT_TOLERANCE",
    "Atom",
    "BufferState",
    "CertificateRow",
    "ConfigError",
    "DeadlineKey",
    "GenConfig",
    "HarnessError",
    "HarnessReport",
    "HarnessState",
    "ModelError",
    "Packet",
    "RunReport",
    "SCHEDULERS",
    "Schedule",
    "SchedulerDecision",
    "SelectionDistribution",
    "SpanDist",
    "StepCertificate",
    "StepEvent",
    "StepRecord",
    "Trace",
    "TraceError",
    "WeightDist",
    "apply_step",
    "buffer_digest",
    "build_report",
    "deadline_before",
    "deadline_before_eq",
    "edf_choose",
    "expected_adv_gain",
    "expected_rmix_gain",
    "generate",
    "get_scheduler",
    "greedy_choose",
    "harness_step",
    "harness_summary_rows",
    "heaviest",
    "opt_brute",
    "opt_greedy",
    "opt_value_of",
    "pareto_frontier",
    "random_buffer",
    "read_trace",
    "realize_deadlines",
    "rmix_choose",
    "rmix_distribution",
    "rmix_sample",
    "run_adaptive",
    "scripted_adversary",
    "simulate_many",
    "simulate_trial",
    "step_certificate",
    "tightness_buffer",
    "write_trace",
]
