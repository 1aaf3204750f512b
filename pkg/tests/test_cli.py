import json

import numpy as np
import pytest

from membench import blur as blur_mod
from membench import suites
from membench.cli import main
from membench.report import parse_csv, parse_json

FAST = ["--reps", "1", "--warmup", "0"]


def _dram_only(tmp_path, cores=1):
    p = tmp_path / "dram.json"
    p.write_text(json.dumps({"name": "dram-only", "core_count": cores,
                             "levels": [{"name": "DRAM", "capacity": "256MiB", "shared": True}]}))
    return p


def _stream_baseline(tmp_path, profile):
    out = tmp_path / "base"
    assert main(["stream", "--profile", str(profile), "--out", str(out), *FAST]) == 0
    return out / "stream.csv"


def test_stream_dram_only(tmp_path):
    assert main(["stream", "--profile", str(_dram_only(tmp_path)), "--out", str(tmp_path / "o"), *FAST]) == 0
    recs = parse_csv((tmp_path / "o" / "stream.csv").read_bytes())
    assert len(recs) == 4
    assert parse_json((tmp_path / "o" / "stream.json").read_bytes()) == recs
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["config"]["reps"] == 1 and manifest["timestamp"]


def test_stream_shipped_xeon_uses_ten_threads(tmp_path):
    assert main(["stream", "--profile", "xeon-4310T", "--out", str(tmp_path), *FAST]) == 0
    recs = parse_csv((tmp_path / "stream.csv").read_bytes())
    dram = [r for r in recs if r.variant.endswith("@DRAM") and r.threads != 1]
    assert len(dram) == 4 and all(r.threads == 10 for r in dram)
    l1 = [r for r in recs if r.variant.endswith("@L1")]
    assert all(r.threads == 1 for r in l1)


def test_stream_partial_failure_still_succeeds(tmp_path):
    # the declared 128 KiB L2 cannot be sized against a 32 KiB L1
    assert main(["stream", "--profile", "starfive-visionfive", "--threads", "1", "--out", str(tmp_path), *FAST]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert any("L2" in s["what"] for s in manifest["skipped"])


def test_missing_profile(tmp_path, capsys):
    assert main(["stream", "--profile", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
    assert "nope.json" in capsys.readouterr().err


def test_transpose_naive_only(tmp_path):
    out = tmp_path / "t"
    assert main(["transpose", "--profile", str(_dram_only(tmp_path)), "--size", "128", "--variants", "naive",
                 "--out", str(out), *FAST]) == 0
    recs = parse_csv((out / "transpose.csv").read_bytes())
    assert len(recs) == 1 and recs[0].speedup == 1.0 and recs[0].utilization is None


def test_transpose_all_variants_with_baseline(tmp_path):
    profile = _dram_only(tmp_path)
    base = _stream_baseline(tmp_path, profile)
    out = tmp_path / "t"
    assert main(["transpose", "--profile", str(profile), "--size", "64", "--size", "96", "--block", "16",
                 "--baseline", str(base), "--out", str(out), *FAST]) == 0
    recs = parse_csv((out / "transpose.csv").read_bytes())
    assert len(recs) == 10
    assert all(r.utilization is not None and r.utilization > 0 and r.blk == 16 for r in recs)


def test_transpose_too_big_skipped(tmp_path, monkeypatch):
    monkeypatch.setattr(suites, "available_memory", lambda: 1 << 20)
    out = tmp_path / "t"
    assert main(["transpose", "--profile", str(_dram_only(tmp_path)), "--size", "16384", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert "does not fit in memory" in manifest["skipped"][0]["reason"]
    assert manifest["records"] == 0


def test_utilization_without_baseline_is_error(tmp_path, capsys):
    code = main(["transpose", "--profile", str(_dram_only(tmp_path)), "--size", "32", "--utilization",
                 "--out", str(tmp_path)])
    assert code == 2
    assert "membench stream" in capsys.readouterr().err


def test_blur_synthetic(tmp_path):
    out = tmp_path / "b"
    assert main(["blur", "--profile", str(_dram_only(tmp_path)), "--synthetic", "random", "--w", "96", "--h", "80",
                 "--filter-size", "5", "--out", str(out), *FAST]) == 0
    recs = parse_csv((out / "blur.csv").read_bytes())
    assert [r.variant for r in recs] == list(blur_mod.VARIANTS)
    assert all(r.f == 5 and r.w == 96 and r.h == 80 and r.c == 3 for r in recs)


def test_default_workload_sizes():
    from membench.cli import DEFAULTS
    assert DEFAULTS["filter_size"] == 19 and (DEFAULTS["w"], DEFAULTS["h"]) == (2544, 2027)
    assert DEFAULTS["size"] == [8192, 16384]


def test_blur_disagreement_names_pair(tmp_path, monkeypatch, capsys):
    def wrong(img, k, threads, out=None, tmp=None, pool=None):
        res = blur_mod.blur_separable_mem(img, k, out=out, tmp=tmp)
        res[res.shape[0] // 2, res.shape[1] // 2, 0] += 1.0
        return res

    monkeypatch.setitem(blur_mod.VARIANTS, "memory", wrong)
    code = main(["blur", "--profile", str(_dram_only(tmp_path)), "--w", "64", "--h", "64", "--filter-size", "3",
                 "--out", str(tmp_path), *FAST])
    assert code == 1
    err = capsys.readouterr().err
    assert "'memory'" in err and "disagree" in err


def test_blur_from_ppm(tmp_path):
    from membench.image import save_ppm, synth_image
    save_ppm(synth_image(40, 30, 3, "random", scale=255.0), tmp_path / "in.ppm")
    assert main(["blur", "--profile", str(_dram_only(tmp_path)), "--image", str(tmp_path / "in.ppm"),
                 "--filter-size", "5", "--out", str(tmp_path / "o"), *FAST]) == 0


def test_suite_skip_blur(tmp_path, small_profile):
    out = tmp_path / "s"
    assert main(["suite", "--profile", str(small_profile), "--size", "64", "--skip", "blur", "--out", str(out),
                 *FAST]) == 0
    assert (out / "stream.csv").exists() and (out / "transpose.csv").exists()
    assert not (out / "blur.csv").exists()


def test_suite_skip_stream_needs_baseline(tmp_path, small_profile, capsys):
    code = main(["suite", "--profile", str(small_profile), "--size", "64", "--skip", "stream",
                 "--out", str(tmp_path), *FAST])
    assert code == 2
    assert "--baseline" in capsys.readouterr().err


def test_suite_skip_stream_with_baseline(tmp_path, small_profile):
    base = _stream_baseline(tmp_path, small_profile)
    out = tmp_path / "s"
    assert main(["suite", "--profile", str(small_profile), "--size", "64", "--skip", "stream", "--baseline",
                 str(base), "--w", "64", "--h", "64", "--filter-size", "5", "--out", str(out), *FAST]) == 0
    assert {p.name for p in out.glob("*.svg")} == {"transpose_time.svg", "blur_time.svg", "utilization.svg"}


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"size": [48], "variants": "naive,dynamic", "reps": 1, "warmup": 0, "block": 8}))
    out = tmp_path / "o"
    assert main(["transpose", "--config", str(cfg), "--profile", str(_dram_only(tmp_path)), "--block", "4",
                 "--out", str(out)]) == 0
    recs = parse_csv((out / "transpose.csv").read_bytes())
    assert [(r.variant, r.n, r.blk) for r in recs] == [("naive", 48, 4), ("dynamic", 48, 4)]


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert main(["stream", "--config", str(cfg), "--profile", "mango-pi-mq-pro"]) == 2


def test_chart_command(tmp_path, small_profile):
    out = tmp_path / "s"
    assert main(["suite", "--profile", str(small_profile), "--size", "64", "--w", "64", "--h", "64",
                 "--filter-size", "5", "--out", str(out), *FAST]) == 0
    charts = tmp_path / "charts"
    assert main(["chart", str(out / "stream.csv"), str(out / "transpose.json"), str(out / "blur.csv"),
                 "--out", str(charts)]) == 0
    assert len(list(charts.glob("*.svg"))) == 4
    assert (charts / "transpose_time.svg").read_bytes() == (out / "transpose_time.svg").read_bytes()


def test_unknown_variant(tmp_path):
    assert main(["transpose", "--profile", str(_dram_only(tmp_path)), "--variants", "fast", "--size", "8"]) == 2


def test_reproducible_records(tmp_path, small_profile):
    def run(d):
        assert main(["suite", "--profile", str(small_profile), "--size", "40", "--w", "48", "--h", "40",
                     "--filter-size", "5", "--seed", "3", "--out", str(d), *FAST]) == 0
        recs = []
        for s in ("stream", "transpose", "blur"):
            recs += parse_csv((d / f"{s}.csv").read_bytes())
        return [(r.suite, r.variant, r.n, r.w, r.h, r.c, r.f, r.blk, r.threads, r.bytes_moved) for r in recs]

    assert run(tmp_path / "a") == run(tmp_path / "b")
