from pathlib import Path

import pytest

from stagesurv.cohort import Stage
from stagesurv.config import LimeMode, RunConfig
from stagesurv.exceptions import ConfigError
from stagesurv.learners import HyperGrid, LearnerKind
from tests.conftest import CONFIG_DIR, TINY_GRIDS, write_run_config


def test_bundled_configs_load():
    config = RunConfig.load(CONFIG_DIR / "synth_colorectal.json")
    assert config.synth is not None
    assert config.schema_config.exists()
    assert config.load_schema().cancer_type == "colorectal"

    seer = RunConfig.load(CONFIG_DIR / "colorectal_seer.json")
    assert seer.input is not None and seer.input.is_absolute()
    assert seer.explainer.lime_mode == LimeMode.AGGREGATE


def test_missing_file(tmp_path: Path):
    with pytest.raises(ConfigError, match="not found"):
        RunConfig.load(tmp_path / "absent.json")


def test_seed_is_required(tmp_path: Path):
    path = write_run_config(tmp_path, schema_config="schema.json", input="cohort.csv")
    with pytest.raises(ConfigError) as e:
        RunConfig.load(path)
    assert e.value.exit_code == 2


@pytest.mark.parametrize(
    "fields",
    [
        {"schema_config": "schema.json", "seed": 1},
        {"schema_config": "schema.json", "seed": 1, "input": "cohort.csv", "synth": {}},
    ],
)
def test_exactly_one_data_source(tmp_path: Path, fields: dict[str, object]):
    with pytest.raises(ConfigError, match="exactly one of input and synth"):
        RunConfig.load(write_run_config(tmp_path, **fields))


def test_bad_grid_axis(tmp_path: Path):
    path = write_run_config(tmp_path, schema_config="s.json", input="c.csv", seed=1, grids={"lr": {"alpha": [1]}})
    with pytest.raises(ConfigError, match="unknown grid axes"):
        RunConfig.load(path)


def test_defaults(tmp_path: Path):
    config = RunConfig.load(write_run_config(tmp_path, schema_config="s.json", input="data/c.csv", seed=1))

    assert config.k_folds == 5
    assert config.threshold == 0.5
    assert config.stages == tuple(Stage)
    assert config.explain_learner == "best"
    assert config.explainer.top_k == 5
    assert config.input == tmp_path / "data" / "c.csv"
    assert config.output_dir == tmp_path / "runs" / "latest"
    assert config.hyper_grids() == [HyperGrid.default_for(learner) for learner in LearnerKind]


def test_partial_grids_fall_back_to_defaults(tmp_path: Path):
    path = write_run_config(tmp_path, schema_config="s.json", input="c.csv", seed=1, grids={"lr": TINY_GRIDS["lr"]})
    grids = RunConfig.load(path).hyper_grids()
    assert len(grids[0].configs(0)) == 1
    assert grids[1] == HyperGrid.default_for(LearnerKind.RANDOM_FOREST)


def test_synth_takes_the_run_seed(tmp_path: Path):
    config = RunConfig.load(write_run_config(tmp_path, schema_config="s.json", seed=17, synth={}))
    assert config.synth is not None and config.synth.seed == 17

    pinned = RunConfig.load(write_run_config(tmp_path, schema_config="s.json", seed=17, synth={"seed": 3}))
    assert pinned.synth is not None and pinned.synth.seed == 3


def test_overrides(tmp_path: Path):
    config = RunConfig.load(
        write_run_config(tmp_path, schema_config="s.json", seed=1, synth={}, explain_learner="rf")
    )
    changed = config.with_overrides(
        seed=9, stages=(Stage.DISTANT,), learners=(LearnerKind.LOGISTIC_REGRESSION,), n_jobs=3
    )

    assert changed.seed == 9 and changed.synth is not None and changed.synth.seed == 9
    assert changed.stages == (Stage.DISTANT,)
    assert changed.learners == (LearnerKind.LOGISTIC_REGRESSION,)
    assert changed.explain_learner == "best"
    assert changed.n_jobs == 3
    assert config.with_overrides() is config


def test_explain_learner_must_be_selected(tmp_path: Path):
    path = write_run_config(tmp_path, schema_config="s.json", seed=1, synth={}, learners=["lr"], explain_learner="rf")
    with pytest.raises(ConfigError, match="not among the selected learners"):
        RunConfig.load(path)
