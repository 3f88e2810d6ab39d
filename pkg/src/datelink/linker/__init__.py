"""Linking transcriptions to manual census records with iterative retraining."""
from .matching import (
    MatchCriteria,
    candidate_scores,
    exact_match,
    intersect_matches,
    is_one_to_one,
    match_until_stable,
    split_matches,
)
from .pipeline import (
    LinkConfig,
    LinkState,
    PipelineResult,
    RoundReport,
    match_round,
    predict_all,
    run_pipeline,
    run_round,
    train_round,
    write_links_csv,
    write_report_json,
)
from .recognizers import (
    DateRecognizer,
    DateTrainer,
    MockRecognizer,
    MockTrainer,
    NameRecognizer,
    NameTrainer,
    mock_model_set,
)
from .records import (
    CensusImage,
    FieldPrediction,
    ManualRecord,
    comparable_date,
    comparable_name,
    normalize_name,
    read_records_csv,
    write_records_csv,
)
from .scenario import (
    CensusScenario,
    default_mock_trainers,
    evaluate_links,
    make_census,
    matchable_pairs,
    push_out_scenario,
)
