"""End-to-end tests of the fuzzforge command line."""

import json

import pytest

from src.main import run
from src.models.annotation import Origin
from src.services import dataset_io
from src.services.sprite_catalog import write_catalog

from tests.builders import catalog_of, core_sprite, detection, manifest, opaque_sprite


SMALL_CONFIG = """\
master_seed: 5
compositor:
  image_size: [96, 64]
scene:
  image_size: [128, 96]
output:
  formats: [json, yolo]
"""


@pytest.fixture
def workspace(tmp_path):
    """Dataset root with a small sprite catalog and pipeline file."""
    write_catalog(catalog_of(opaque_sprite(6, 12), core_sprite(10, 10)), tmp_path / "sprites")
    (tmp_path / "pipeline.yaml").write_text(SMALL_CONFIG, encoding='utf-8')
    return tmp_path


def tree_bytes(root):
    return {
        str(path.relative_to(root)): path.read_bytes()
        for path in sorted(root.rglob('*')) if path.is_file()
    }


class TestUsage:
    """Test cases for argument handling."""

    def test_unknown_subcommand(self):
        """An unknown subcommand is a usage error."""
        assert run(['render-everything']) == 2

    def test_missing_required_option(self):
        """gen-m2 without --count is a usage error."""
        assert run(['gen-m2']) == 2

    def test_help(self, capsys):
        """--help exits cleanly and lists the subcommands."""
        assert run(['--help']) == 0
        assert 'gen-m2' in capsys.readouterr().out

    def test_zero_jobs_is_a_usage_error(self, capsys):
        """--jobs 0 is rejected by the parser with status 2."""
        assert run(['--jobs', '0', 'budget', '--c-real', '1', '--c-synth', '1', '--c-total', '1', '--step', '1']) == 2
        assert '--jobs' in capsys.readouterr().err

    def test_non_numeric_jobs_is_a_usage_error(self):
        """--jobs must be an integer."""
        assert run(['--jobs', 'many', 'budget', '--c-real', '1', '--c-synth', '1', '--c-total', '1', '--step', '1']) == 2


class TestGenerate:
    """Test cases for the generator subcommands."""

    def test_gen_m2_is_reproducible(self, workspace):
        """Running gen-m2 twice with the same seed writes identical bytes."""
        base = ['--root', str(workspace), '--config', 'pipeline.yaml']
        for out in ('first', 'second'):
            assert run(base + ['gen-m2', '--catalog', 'sprites/catalog.json', '--count', '3', '--out', out]) == 0
        assert tree_bytes(workspace / "first") == tree_bytes(workspace / "second")
        assert len(dataset_io.read_manifest(workspace / "first" / "manifest.json")) == 3

    def test_seed_option_changes_output(self, workspace):
        """--seed overrides the configured master seed."""
        base = ['--root', str(workspace), '--config', 'pipeline.yaml']
        run(base + ['gen-m2', '--catalog', 'sprites/catalog.json', '--count', '2', '--out', 'a'])
        run(base + ['--seed', '6', 'gen-m2', '--catalog', 'sprites/catalog.json', '--count', '2', '--out', 'b'])
        assert dataset_io.read_manifest(workspace / "b" / "manifest.json").provenance.master_seed == 6
        assert tree_bytes(workspace / "a" / "images") != tree_bytes(workspace / "b" / "images")

    def test_gen_m1_with_pairing(self, workspace, capsys):
        """gen-m1 --paired feeds diff-annotations."""
        base = ['--root', str(workspace), '--config', 'pipeline.yaml']
        assert run(base + ['gen-m1', '--catalog', 'sprites/catalog.json', '--count', '3', '--out', 'm1',
                           '--paired', 'paired']) == 0
        assert run(base + ['diff-annotations', '--m1', 'm1/manifest.json', '--m2', 'paired/manifest.json',
                           '--pairing', 'paired/pairing.json']) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats['containment_violations'] == 0

    def test_missing_catalog(self, workspace):
        """A missing catalog is an I/O error with exit status 1."""
        assert run(['--root', str(workspace), 'gen-m2', '--catalog', 'absent/catalog.json', '--count', '1']) == 1


class TestDataCommands:
    """Test cases for curation, mixing, evaluation and reporting subcommands."""

    def test_eval_perfect_detections(self, tmp_path, capsys):
        """Detections equal to the truth score AP 1."""
        truth = manifest(["a.png", "b.png"])
        dataset_io.write_manifest(truth, tmp_path / "truth.json")
        dataset_io.write_detections(
            [detection(r.image_name, 0.9, r.boxes[0].to_corners()) for r in truth.records], tmp_path / "dets.json"
        )
        assert run(['--root', str(tmp_path), 'eval', '--detections', 'dets.json', '--truth', 'truth.json']) == 0
        report = json.loads(capsys.readouterr().out)
        assert report['ap'] == pytest.approx(1.0)
        assert report['ap50'] == pytest.approx(1.0)

    def test_eval_over_seeds(self, tmp_path, capsys):
        """Several detections files add mean and std over seeds."""
        truth = manifest(["a.png"])
        dataset_io.write_manifest(truth, tmp_path / "truth.json")
        dataset_io.write_detections([detection("a.png", 0.9, truth.records[0].boxes[0].to_corners())],
                                    tmp_path / "seed0.json")
        dataset_io.write_detections([], tmp_path / "seed1.json")
        assert run(['--root', str(tmp_path), 'eval', '--detections', 'seed0.json', 'seed1.json',
                    '--truth', 'truth.json']) == 0
        report = json.loads(capsys.readouterr().out)
        assert report['ap50'] == pytest.approx(0.5)
        assert report['seed_stats']['count'] == 2

    def test_eval_missing_files(self, tmp_path):
        """Unreadable inputs exit with status 1."""
        assert run(['--root', str(tmp_path), 'eval', '--detections', 'no.json', '--truth', 'no.json']) == 1

    def test_budget_table(self, capsys):
        """The frontier prints as CSV on standard output."""
        assert run(['budget', '--c-real', '2', '--c-synth', '1', '--c-total', '1000', '--step', '250']) == 0
        assert capsys.readouterr().out == "n_real,n_synth\n0,1000\n250,500\n500,0\n"

    def test_budget_infeasible(self):
        """An unreachable min_total exits with status 1."""
        assert run(['budget', '--c-real', '2', '--c-synth', '1', '--c-total', '10', '--step', '1',
                    '--min-total', '100']) == 1

    def test_split_uses_global_seed(self, tmp_path):
        """--seed seeds the split and is recorded in each part."""
        dataset_io.write_manifest(manifest([f"img_{i}.png" for i in range(20)]), tmp_path / "all.json")
        assert run(['--root', str(tmp_path), '--seed', '4', 'split', '--manifest', 'all.json',
                    '--ratios', '0.8', '0.1', '0.1', '--out', 'parts']) == 0
        val = dataset_io.read_manifest(tmp_path / "parts" / "val.json")
        assert len(val) == 2
        assert val.provenance.extra['split_seed'] == 4

    def test_named_mixtures(self, tmp_path):
        """mix --spec writes one manifest per name and seed."""
        real = manifest([f"r_{i}.png" for i in range(5)], origin=Origin.REAL)
        synth = manifest([f"s_{i}.png" for i in range(5)], origin=Origin.SYNTHETIC)
        dataset_io.write_manifest(real, tmp_path / "real.json")
        dataset_io.write_manifest(synth, tmp_path / "synth.json")
        assert run(['--root', str(tmp_path), 'mix', '--real', 'real.json', '--synth', 'synth.json',
                    '--spec', 'R2_S2', '--seeds', '0', '1', '--out', 'mixes']) == 0
        assert sorted(p.name for p in (tmp_path / "mixes").iterdir()) == ["R2_S2_seed0.json", "R2_S2_seed1.json"]

    def test_report_markdown(self, tmp_path, capsys):
        """report renders mean and standard deviation in percent."""
        (tmp_path / "table.yaml").write_text(
            "columns: [[T, ap50]]\n"
            "rows:\n"
            "  - name: R500_S500\n"
            "    cells: {T: {mean: {ap50: 0.423}, std: {ap50: 0.0362}}}\n",
            encoding='utf-8'
        )
        assert run(['--root', str(tmp_path), 'report', '--input', 'table.yaml']) == 0
        assert "42.30 ± 3.62" in capsys.readouterr().out

    def test_unknown_config_key(self, tmp_path):
        """A pipeline file with an unknown key exits with status 1."""
        (tmp_path / "bad.yaml").write_text("compositor:\n  colour: red\n", encoding='utf-8')
        assert run(['--root', str(tmp_path), '--config', 'bad.yaml', 'budget', '--c-real', '1',
                    '--c-synth', '1', '--c-total', '1', '--step', '1']) == 1

    def test_log_dir_receives_structured_log(self, tmp_path):
        """--log-dir adds the rotating and structured log files."""
        assert run(['--log-dir', str(tmp_path / "logs"), 'budget', '--c-real', '2', '--c-synth', '1',
                    '--c-total', '10', '--step', '5']) == 0
        assert (tmp_path / "logs" / "fuzzforge.log").exists()
        assert (tmp_path / "logs" / "structured.jsonl").exists()
