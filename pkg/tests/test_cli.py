import json

import numpy as np
import pytest

from viewdisagree.cli import main, parse_rates
from viewdisagree.dataset import BACKGROUND, load_dataset

SMALL = ["--per-class", "30", "--test-per-class", "10"]


@pytest.fixture
def data_file(tmp_path):
    path = tmp_path / "d.jsonl"
    assert main(["generate", *SMALL, "--disagreement", "0.3", "--seed", "2", "-o", str(path)]) == 0
    return path


class TestGenerate:
    def test_header_and_corruption_count(self, tmp_path, capsys):
        path = tmp_path / "d.jsonl"
        assert main(["generate", "--disagreement", "0.4", "--seed", "42", "-o", str(path)]) == 0
        header = json.loads(path.read_text().splitlines()[0])
        assert header["V"] == 2 and header["dims"] == [2, 2] and header["n_classes"] == 2
        ds = load_dataset(path)
        labels = ds.unlabeled.true_view_labels
        one_bg = np.sum((labels == BACKGROUND).sum(axis=1) == 1)
        assert one_bg == 120
        assert "samples with view disagreement: 120" in capsys.readouterr().out

    def test_missing_output(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["generate"])
        assert exc.value.code == 2
        assert "--output" in capsys.readouterr().err

    def test_rate_out_of_range(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--disagreement", "1.5", "-o", str(tmp_path / "x.jsonl")])
        assert exc.value.code == 2
        assert "--disagreement" in capsys.readouterr().err
        assert not (tmp_path / "x.jsonl").exists()

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"per_class": 20, "test_per_class": 5, "disagreement": 0.5}))
        out = tmp_path / "d.jsonl"
        assert main(["generate", "--config", str(cfg), "--disagreement", "0.0", "-o", str(out)]) == 0
        ds = load_dataset(out)
        assert np.all(ds.unlabeled.redundant())
        assert len(ds.test) == 10

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"per_clas": 20}))
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--config", str(cfg), "-o", str(tmp_path / "d.jsonl")])
        assert exc.value.code == 2 and "per_clas" in capsys.readouterr().err


class TestDetect:
    def test_outputs(self, data_file, tmp_path, capsys):
        out = tmp_path / "det"
        assert main(["detect", "-i", str(data_file), "-o", str(out)]) == 0
        lines = (out / "verdicts.csv").read_text().splitlines()
        assert lines[0] == "sample_index,verdict,m_12,m_21,H_12,H_21"
        assert len(lines) - 1 == len(load_dataset(data_file).unlabeled)
        assert (out / "roc.csv").exists() and (out / "roc.svg").exists()
        assert "foreground detection AUC" in capsys.readouterr().out

    def test_byte_identical_rerun(self, data_file, tmp_path):
        for name in ("a", "b"):
            assert main(["detect", "-i", str(data_file), "-o", str(tmp_path / name)]) == 0
        for f in ("verdicts.csv", "roc.csv", "roc.svg"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_missing_input(self, tmp_path):
        with pytest.raises(SystemExit, match="not found"):
            main(["detect", "-i", str(tmp_path / "nope.jsonl"), "-o", str(tmp_path)])

    def test_malformed_input(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"V": 2, "dims": [2, 2], "n_classes": 2}\n{oops\n')
        with pytest.raises(SystemExit, match="line 2"):
            main(["detect", "-i", str(bad), "-o", str(tmp_path)])


class TestBootstrap:
    @pytest.mark.parametrize("method", ["baseline", "filtered"])
    def test_trace(self, data_file, tmp_path, method):
        out = tmp_path / "trace.csv"
        assert main(["bootstrap", "-i", str(data_file), "-o", str(out), "--method", method, "--N", "12"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "iteration,view,labeled_size,unlabeled_size,test_ccr,pairs_filtered"
        assert lines[-1].split(",")[3] == "0"

    def test_crossmodal(self, data_file, tmp_path):
        out = tmp_path / "pairs.csv"
        assert main(["bootstrap", "-i", str(data_file), "-o", str(out), "--method", "crossmodal"]) == 0
        assert out.read_text().startswith("sample_index,strong_label,H_label_given_view")

    def test_bad_N(self, data_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["bootstrap", "-i", str(data_file), "-o", str(tmp_path / "t.csv"), "--N", "0"])
        assert exc.value.code == 2


class TestSweep:
    ARGS = [*SMALL, "--methods", "baseline,filtered", "--rates", "0:0.4:0.2", "--trials", "2", "--N", "12"]

    def test_outputs_and_determinism(self, tmp_path, capsys):
        for name in ("a", "b"):
            assert main(["sweep", *self.ARGS, "-o", str(tmp_path / name)]) == 0
        rows = (tmp_path / "a" / "sweep.csv").read_text().splitlines()
        assert rows[0] == "method,rate,view,mean_ccr,std_ccr,trials"
        assert len(rows) - 1 == 2 * 3 * 2
        for f in ("sweep.csv", "trials.csv", "sweep.svg"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_zero_trials(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--trials", "0", "-o", str(tmp_path)])
        assert exc.value.code == 2
        assert "--trials" in capsys.readouterr().err

    def test_bad_rates(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["sweep", "--rates", "0:2:0.5", "-o", str(tmp_path)])


def test_parse_rates():
    assert parse_rates("0:0.9:0.1") == pytest.approx([k / 10 for k in range(10)])
    assert parse_rates("0.1,0.5") == [0.1, 0.5]
    with pytest.raises(ValueError):
        parse_rates("0:1:0")
