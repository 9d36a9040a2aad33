import json

import numpy as np
import pytest
from PIL import Image

from dhaar.cli import main
from dhaar.filters import FilterMask, RegionWeights, TrainedClassifier
from dhaar.models import load_model, save_model
from dhaar.synth import generate, write_dataset


@pytest.fixture(scope="module")
def dataset_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthdata")
    faces, clutters = write_dataset("separable", 20, 7, root)
    return faces, clutters


@pytest.fixture(scope="module")
def trained_model(dataset_dirs, tmp_path_factory):
    faces, clutters = dataset_dirs
    out = tmp_path_factory.mktemp("model") / "model.json"
    rc = main(["train", "--faces", str(faces), "--clutter", str(clutters),
               "--out", str(out), "--n", "512", "--rule", "sigmoid",
               "--eps", "20"])
    assert rc == 0
    return out


class TestModelFile:
    def make(self):
        mask = FilterMask(4, 4, [3, 0, 7], [1, 12])
        return TrainedClassifier(mask, RegionWeights(), theta=0.123456789012345)

    def test_round_trip(self, tmp_path):
        c = self.make()
        p = tmp_path / "m.json"
        save_model(c, p, {"rule": "sigmoid"})
        loaded, meta = load_model(p)
        assert np.array_equal(loaded.mask.black_indices, c.mask.black_indices)
        assert np.array_equal(loaded.mask.white_indices, c.mask.white_indices)
        assert loaded.theta == c.theta
        assert meta == {"rule": "sigmoid"}

    def test_byte_stable(self, tmp_path):
        c = self.make()
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_model(c, p1, {})
        loaded, meta = load_model(p1)
        save_model(loaded, p2, meta)
        assert p1.read_bytes() == p2.read_bytes()

    def test_version_checked(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps({"format_version": 99}))
        with pytest.raises(ValueError):
            load_model(p)


class TestCmdTrain:
    def test_writes_model_and_history(self, trained_model):
        doc = json.loads(trained_model.read_text())
        assert len(doc["black_indices"]) + len(doc["white_indices"]) == 512
        history = trained_model.with_name("model_history.csv")
        assert history.exists()
        header = history.read_text().splitlines()[0]
        assert header == "iteration,fp_rate,fn_rate,theta,s_star"
        assert history.with_suffix(".png").exists()

    def test_missing_directory_exit_2(self, tmp_path):
        rc = main(["train", "--faces", str(tmp_path / "nope"),
                   "--clutter", str(tmp_path / "nope2"),
                   "--out", str(tmp_path / "m.json")])
        assert rc == 2

    def test_empty_directory_exit_2(self, tmp_path, dataset_dirs):
        empty = tmp_path / "empty"
        empty.mkdir()
        rc = main(["train", "--faces", str(empty),
                   "--clutter", str(dataset_dirs[1]),
                   "--out", str(tmp_path / "m.json")])
        assert rc == 2

    def test_undecodable_files_skipped(self, tmp_path, dataset_dirs, capsys):
        bad_dir = tmp_path / "mixed"
        bad_dir.mkdir()
        (bad_dir / "bad.png").write_bytes(b"not an image")
        for i, p in enumerate(sorted(dataset_dirs[0].iterdir())[:5]):
            (bad_dir / f"ok{i}.png").write_bytes(p.read_bytes())
        rc = main(["train", "--faces", str(bad_dir),
                   "--clutter", str(dataset_dirs[1]),
                   "--out", str(tmp_path / "m.json"), "--max-iter", "3"])
        assert rc == 0
        assert "skipping" in capsys.readouterr().err

    def test_band_region_training(self, tmp_path, dataset_dirs):
        out = tmp_path / "band.json"
        rc = main(["train", "--faces", str(dataset_dirs[0]),
                   "--clutter", str(dataset_dirs[1]), "--out", str(out),
                   "--region", "band:16:40", "--n", "128", "--max-iter", "5"])
        assert rc == 0
        doc = json.loads(out.read_text())
        engaged = doc["black_indices"] + doc["white_indices"]
        assert min(engaged) >= 16 * 64 and max(engaged) < 40 * 64


class TestCmdClassify:
    def test_single_model_face(self, trained_model, dataset_dirs, capsys):
        face = sorted(dataset_dirs[0].iterdir())[0]
        rc = main(["classify", str(trained_model), str(face)])
        assert rc == 0
        assert capsys.readouterr().out.splitlines()[0] == "face"

    def test_three_models_composite(self, trained_model, dataset_dirs, capsys):
        clutter = sorted(dataset_dirs[1].iterdir())[0]
        m = str(trained_model)
        rc = main(["classify", m, m, m, str(clutter)])
        assert rc == 0
        assert capsys.readouterr().out.splitlines()[0] == "clutter"

    def test_two_models_usage_error(self, trained_model, dataset_dirs):
        m = str(trained_model)
        face = sorted(dataset_dirs[0].iterdir())[0]
        assert main(["classify", m, m, str(face)]) == 2

    def test_shape_mismatch_exit_3(self, trained_model, dataset_dirs):
        face = sorted(dataset_dirs[0].iterdir())[0]
        rc = main(["classify", str(trained_model), str(face), "--side", "32"])
        assert rc == 3


class TestCmdSynth:
    def test_reproducible(self, tmp_path):
        rc = main(["synth", "separable", "5", "42", str(tmp_path / "a")])
        assert rc == 0
        assert main(["synth", "separable", "5", "42", str(tmp_path / "b")]) == 0
        a = sorted((tmp_path / "a" / "faces").iterdir())
        b = sorted((tmp_path / "b" / "faces").iterdir())
        assert len(a) == 5
        assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))

    def test_seed_changes_pixels(self):
        f1, _ = generate("separable", 2, 1)
        f2, _ = generate("separable", 2, 2)
        assert not np.array_equal(f1[0].pixels, f2[0].pixels)

    def test_noisy_kind(self, tmp_path):
        assert main(["synth", "noisy", "3", "1", str(tmp_path / "n")]) == 0


class TestCmdInspect:
    def test_rendering_rule(self, tmp_path):
        c = TrainedClassifier(FilterMask(2, 2, [0], [1]), theta=0.0)
        model = tmp_path / "m.json"
        save_model(c, model, {})
        out = tmp_path / "m.png"
        assert main(["inspect", str(model), str(out)]) == 0
        px = np.asarray(Image.open(out))
        assert px.ravel().tolist() == [0, 255, 128, 128]

    def test_engaged_count_preserved(self, trained_model, tmp_path):
        out = tmp_path / "f.png"
        assert main(["inspect", str(trained_model), str(out)]) == 0
        px = np.asarray(Image.open(out))
        assert int((px != 128).sum()) == 512

    def test_byte_identical_renders(self, trained_model, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        main(["inspect", str(trained_model), str(a)])
        main(["inspect", str(trained_model), str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestCmdEval:
    def test_reports_emitted(self, dataset_dirs, tmp_path):
        out = tmp_path / "report"
        rc = main(["eval", "--faces", str(dataset_dirs[0]),
                   "--clutter", str(dataset_dirs[1]), "--out-dir", str(out),
                   "--train-frac", "0.7", "--seed", "5", "--max-iter", "50"])
        assert rc == 0
        for name in ("model.json", "history.csv", "history.png",
                     "roc.csv", "roc.png", "summary.json"):
            assert (out / name).exists(), name
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary) == {"accuracy", "auc", "fn_rate", "fp_rate"}
        assert summary["accuracy"] == 1.0  # separable synthetic data


class TestCmdDetect:
    def test_small_picture_empty_json(self, trained_model, tmp_path, dataset_dirs):
        from dhaar.synth import save_png
        from dhaar.imaging import GrayImage

        pic = tmp_path / "small.png"
        save_png(GrayImage(np.full((40, 40), 0.5)), pic)
        out = tmp_path / "d.json"
        m = str(trained_model)
        rc = main(["detect", m, m, m, str(pic), "--min-side", "64",
                   "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text()) == []

    def test_no_skin_equals_default_on_grayscale(self, trained_model, tmp_path):
        from dhaar.synth import save_png
        from dhaar.imaging import GrayImage

        rng = np.random.default_rng(0)
        pic = tmp_path / "pic.png"
        save_png(GrayImage(rng.uniform(0, 1, (128, 128))), pic)
        m = str(trained_model)
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["detect", m, m, m, str(pic), "--out", str(out1)]) == 0
        assert main(["detect", m, m, m, str(pic), "--no-skin",
                     "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_model_exit_2(self, tmp_path):
        pic = tmp_path / "x.png"
        rc = main(["detect", "a.json", "b.json", "c.json", str(pic)])
        assert rc == 2
