from .reachability import Reachability, ReachabilityConfig, TtcResult
from .criticality import (
    Criticality,
    CriticalityConfig,
    CriticalityRecord,
    Zone,
    dump_records,
    load_records,
    records_frame,
    zone_summary,
)
from .loss import (
    LossItem,
    LossParams,
    batch_loss,
    emit_loss_curves,
    focal_loss,
    safety_focal_loss,
)
from .curation import Curated2DBox, Curation, dump_curated, load_curated
from .evaluation import EvalReport, Evaluation, EvaluationConfig, compare_reports
from .oracle import SampledTrajectoryConfig, TrajectoryOracle, sweep_ap
from .scenario import ScenarioGenerator, ScenarioSpec
