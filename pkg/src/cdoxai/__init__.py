"""Arrival-trajectory adherence classification with explainable attributions.

The package covers the full pipeline: parsing and clipping raw arrival
tracks, deriving the 29-feature flight record and its adherence label,
training tree ensembles under three classification scenarios, computing
exact per-tree attributions with class-separability analysis, and distilling
the three dominant features into a fuzzy winner-take-all rule classifier.
A seeded synthetic generator provides ground-truth fleets for end-to-end
verification, and the ``cdoxai`` CLI chains the stages on disk.
"""

from .errors import CdoError
from .features import (
    FEATURE_COLUMNS,
    FlightFeatures,
    Segment,
    WeatherRecord,
    assemble_dataset,
    cdo_adherence,
    cdocat,
    extract_operational_features,
    is_cdo_segment,
    join_weather,
    segment_track,
)
from .fexai import (
    FuzzyRule,
    MembershipFunction,
    RuleBase,
    defuzzify,
    evaluate_fexai,
    extract_rules,
    infer,
    membership_degrees,
    reference_rules,
    winner_take_all,
)
from .forest import (
    BoostParams,
    CvReport,
    ForestParams,
    Metrics,
    SCENARIOS,
    ScenarioSpec,
    Tree,
    TreeEnsemble,
    cross_validate,
    evaluate,
    predict_proba,
    relabel,
    stratified_kfold,
    train_gradient_boosting,
    train_random_forest,
    train_tree,
)
from .geo import great_circle_nm
from .ingest import (
    ArrivalTrack,
    TmaConfig,
    TrackPoint,
    clip_to_tma,
    entry_sector,
    parse_track_csv,
    write_track_csv,
)
from .shapley import (
    GlobalImportance,
    ShapMatrix,
    WdReport,
    class_specific_shap,
    ensemble_shap,
    global_importance,
    tree_shap,
    wasserstein_1d,
    wd_report,
)
from .synth import FleetDataset, SynthSpec, TrackTruth, gen_fleet, gen_track

__version__ = "0.1.0"
