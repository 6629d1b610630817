import json

import pytest

from cdoxai.cli import load_config, main
from cdoxai.fexai import read_rule_base

SMALL_CONFIG = """\
# small deterministic pipeline for tests
seed = 13
n_flights = 120
k_folds = 5
n_trees = 8
max_depth = 5
min_leaf = 2
n_rounds = 10
learning_rate = 0.3
boost_depth = 3
"""


@pytest.fixture()
def workdir(tmp_path):
    cfg_path = tmp_path / "pipeline.cfg"
    cfg_path.write_text(SMALL_CONFIG + f"out_dir = {tmp_path / 'out'}\n", encoding="utf-8")
    return tmp_path, cfg_path


def _run(cfg_path, *argv):
    return main(["--config", str(cfg_path), *argv])


class TestConfig:
    def test_defaults_and_file_overrides(self, workdir):
        _, cfg_path = workdir
        cfg = load_config(cfg_path)
        assert cfg.seed == 13
        assert cfg.n_trees == 8
        assert cfg.tma_radius_nm == 45.0  # untouched default

    def test_unknown_key_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("not_a_knob = 3\n", encoding="utf-8")
        assert main(["--config", str(bad), "synth"]) == 1

    def test_bad_flag_is_usage_error(self):
        assert main(["definitely-not-a-command"]) == 1

    def test_hash_is_stable(self, workdir):
        _, cfg_path = workdir
        assert load_config(cfg_path).config_hash == load_config(cfg_path).config_hash


class TestPipeline:
    def test_full_chain_and_artifacts(self, workdir):
        tmp_path, cfg_path = workdir
        out = tmp_path / "out"
        for cmd in ("synth", "ingest", "features", "train", "explain", "fexai"):
            assert _run(cfg_path, cmd) == 0, cmd
        for name in (
            "tracks.csv",
            "weather.csv",
            "truth.csv",
            "tracks_clipped.csv",
            "features.csv",
            "cv_report.json",
            "model_full.json",
            "model_fold0.json",
            "shap_values.csv",
            "shap_summary.json",
            "rules.txt",
            "fexai_cv.json",
        ):
            assert (out / name).exists(), name

    def test_outputs_embed_config_hash_and_seed(self, workdir):
        tmp_path, cfg_path = workdir
        cfg = load_config(cfg_path)
        assert _run(cfg_path, "synth") == 0
        head = (tmp_path / "out" / "tracks.csv").read_text().splitlines()[0]
        assert head == f"# config={cfg.config_hash} seed={cfg.seed} format=1"
        assert _run(cfg_path, "ingest") == 0
        assert _run(cfg_path, "features") == 0
        assert _run(cfg_path, "train") == 0
        doc = json.loads((tmp_path / "out" / "cv_report.json").read_text())
        assert doc["config_hash"] == cfg.config_hash
        assert doc["seed"] == cfg.seed

    def test_rerun_is_byte_identical(self, workdir):
        tmp_path, cfg_path = workdir
        out = tmp_path / "out"
        for cmd in ("synth", "ingest", "features", "train", "explain", "fexai"):
            assert _run(cfg_path, cmd) == 0
        names = [
            "tracks.csv", "weather.csv", "truth.csv", "tracks_clipped.csv",
            "features.csv", "cv_report.json", "model_full.json",
            "shap_values.csv", "shap_summary.json", "rules.txt", "fexai_cv.json",
        ]
        before = {n: (out / n).read_bytes() for n in names}
        for cmd in ("synth", "ingest", "features", "train", "explain", "fexai"):
            assert _run(cfg_path, cmd) == 0
        after = {n: (out / n).read_bytes() for n in names}
        assert before == after

    def test_rules_file_parses_back(self, workdir):
        tmp_path, cfg_path = workdir
        for cmd in ("synth", "ingest", "features", "fexai"):
            assert _run(cfg_path, cmd) == 0
        rb = read_rule_base(tmp_path / "out" / "rules.txt")
        assert len(rb) >= 1

    def test_missing_input_names_producer(self, workdir, capsys):
        _, cfg_path = workdir
        assert _run(cfg_path, "features") == 2
        err = capsys.readouterr().err
        assert "ingest" in err or "synth" in err

    def test_missing_models_name_train(self, workdir, capsys):
        tmp_path, cfg_path = workdir
        for cmd in ("synth", "ingest", "features"):
            assert _run(cfg_path, cmd) == 0
        assert _run(cfg_path, "explain") == 2
        assert "train" in capsys.readouterr().err


class TestReport:
    def test_report_emits_tables_and_plots(self, workdir):
        tmp_path, cfg_path = workdir
        out = tmp_path / "out"
        for cmd in ("synth", "ingest", "features", "report"):
            assert _run(cfg_path, cmd) == 0
        scen = (out / "report_scenarios.csv").read_text().splitlines()
        assert scen[1] == "scenario,classifier,Acc,Pr,Recall,F1"
        assert len(scen) == 2 + 6  # comment + header + 3 scenarios x 2 models
        sep = (out / "report_separability.csv").read_text().splitlines()
        assert sep[1] == "scenario,classifier,mean_wd,top5_mean_wd,count_wd_above_0.5"
        assert len(sep) == 2 + 2
        top3 = (out / "report_top3.csv").read_text().splitlines()
        assert top3[1] == "classifier,Acc,Pr,Recall,F1"
        assert [ln.split(",")[0] for ln in top3[2:]] == [
            "fexai", "random_forest", "gradient_boosting",
        ]
        rules = read_rule_base(out / "report_rules.txt")
        assert len(rules) >= 1
        assert (out / "importance_low_vs_notlow.svg").exists()
        svgs = list(out.glob("dependence_*.svg"))
        assert len(svgs) == 3
