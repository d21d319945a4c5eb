"""Run configuration parsing, defaults, and the tau grid."""

from __future__ import annotations

import pytest

from graphlens.config import RunConfig, load_config, parse_config


class TestTauGrid:
    def test_default_grid_covers_005_to_one(self):
        grid = RunConfig(seed=1).tau_grid()
        assert len(grid) == 20
        assert grid[0] == pytest.approx(0.05)
        assert grid[-1] == pytest.approx(1.0)
        diffs = [b - a for a, b in zip(grid, grid[1:])]
        assert all(d == pytest.approx(0.05, abs=1e-12) for d in diffs)

    def test_coarse_grid(self):
        grid = RunConfig(seed=1, tau_step=0.25).tau_grid()
        assert grid == pytest.approx([0.25, 0.5, 0.75, 1.0])

    def test_non_divisor_step_stops_below_one(self):
        grid = RunConfig(seed=1, tau_step=0.3).tau_grid()
        assert grid == pytest.approx([0.3, 0.6, 0.9])

    def test_step_outside_unit_interval_rejected(self):
        with pytest.raises(ValueError):
            RunConfig(seed=1, tau_step=0.0)
        with pytest.raises(ValueError):
            RunConfig(seed=1, tau_step=1.5)


class TestRunConfigDefaults:
    def test_seed_is_mandatory(self):
        with pytest.raises(TypeError):
            RunConfig()  # type: ignore[call-arg]

    def test_documented_defaults(self):
        cfg = RunConfig(seed=5)
        assert cfg.sizes == (8, 16, 32, 64)
        assert cfg.classes == ("star", "wheel", "ladder")
        assert cfg.corpus_count == 100
        assert cfg.splice_extra == 10
        assert cfg.parts_per_class == 30
        assert cfg.tau_step == 0.05
        assert cfg.train_fraction == 0.8
        assert cfg.lp_node_cap == 5000
        assert cfg.walks_per_node == 1
        assert cfg.workers == 1
        assert cfg.row_normalize is False

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(seed=5, sizes=(16, 8))  # must ascend
        with pytest.raises(ValueError):
            RunConfig(seed=5, sizes=())
        with pytest.raises(ValueError):
            RunConfig(seed=5, sizes=(1, 8))
        with pytest.raises(ValueError):
            RunConfig(seed=5, classes=("star",))
        with pytest.raises(ValueError):
            RunConfig(seed=5, train_fraction=1.5)
        with pytest.raises(ValueError):
            RunConfig(seed=5, workers=0)
        with pytest.raises(ValueError):
            RunConfig(seed=5, walks_per_node=0)
        with pytest.raises(ValueError):
            RunConfig(seed=5, lp_node_cap=0)
        with pytest.raises(ValueError):
            RunConfig(seed=5, splice_extra=-1)


class TestParseConfig:
    def test_key_value_lines_with_comments(self):
        overrides = parse_config(
            "# experiment settings\n"
            "seed = 42\n"
            "\n"
            "sizes = 8,16\n"
            "classes = star, ladder\n"
            "walks_per_node = 3  # denser sampling\n"
            "row_normalize = yes\n")
        assert overrides == {
            "seed": 42,
            "sizes": (8, 16),
            "classes": ("star", "ladder"),
            "walks_per_node": 3,
            "row_normalize": True,
        }

    @pytest.mark.parametrize("raw,expected", [
        ("true", True), ("1", True), ("yes", True),
        ("false", False), ("0", False), ("no", False),
    ])
    def test_row_normalize_spellings(self, raw, expected):
        assert parse_config(f"row_normalize = {raw}") == {
            "row_normalize": expected}

    def test_unknown_key_reports_line_number(self):
        with pytest.raises(ValueError, match="line 2.*walk_count"):
            parse_config("seed = 1\nwalk_count = 3\n")

    def test_bad_value_reports_line_number(self):
        with pytest.raises(ValueError, match="line 1.*many"):
            parse_config("seed = many\n")

    def test_bad_flag_value_rejected(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_config("row_normalize = maybe\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_config("seed 1\n")


class TestLoadConfig:
    def test_cli_overrides_beat_the_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed = 9\nworkers = 2\ncorpus_count = 40\n")
        cfg = load_config(str(path), {"seed": 11, "workers": None})
        assert cfg.seed == 11       # CLI value wins
        assert cfg.workers == 2     # a None override leaves the file value
        assert cfg.corpus_count == 40

    def test_no_file_uses_defaults_plus_overrides(self):
        cfg = load_config(None, {"seed": 3})
        assert cfg.seed == 3
        assert cfg.sizes == (8, 16, 32, 64)

    def test_seed_required_somewhere(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("workers = 2\n")
        with pytest.raises(ValueError, match="seed"):
            load_config(str(path), {})
