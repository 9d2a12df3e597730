# tests/test_cli.py
import json

import pytest

from service.cli import EXIT_INPUT, EXIT_OK, build_parser, main


def test_parser_flags(tmp_path):
    args = build_parser().parse_args([
        "analyze", str(tmp_path / "m.json"), "--samples", "64", "--bits", "512",
        "--no-assume-small", "--sym-range", "3",
    ])
    assert args.samples == 64
    assert args.bits == 512
    assert args.assume_small is False
    assert args.sym_range == 3
    assert args.csv is None


def test_missing_input_is_input_error(tmp_path):
    assert main(["analyze", str(tmp_path / "missing.json"), "--workers", "1", "--quiet"]) == EXIT_INPUT


def test_bad_sample_count_is_input_error(fixtures_dir):
    assert main(["analyze", str(fixtures_dir / "trefoil.json"), "--samples", "12",
                 "--workers", "1"]) == EXIT_INPUT


def test_alexander_text(fixtures_dir, capsys):
    assert main(["alexander", str(fixtures_dir / "trefoil.json")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "t^2 - t + 1" in out
    assert "k = 1" in out
    assert "L-space form: yes" in out


def test_alexander_json(fixtures_dir, capsys):
    assert main(["alexander", str(fixtures_dir / "figure8.json"), "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["polynomial"] == "t^2 - 3*t + 1"
    assert data["value_at_one"] == -1
    assert data["roots"] == []


def test_alexander_bad_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[]", encoding="utf-8")
    assert main(["alexander", str(path)]) == EXIT_INPUT


def test_analyze_solid_torus(fixtures_dir, tmp_path, capsys):
    report = tmp_path / "out" / "report.json"
    csv_path = tmp_path / "out" / "locus.csv"
    svg_path = tmp_path / "out" / "locus.svg"
    code = main([
        "analyze", str(fixtures_dir / "solid_torus.json"), "--samples", "8", "--workers", "1",
        "--report", str(report), "--csv", str(csv_path), "--svg", str(svg_path),
    ])
    assert code == EXIT_OK
    data = json.loads(report.read_text(encoding="utf-8"))
    digest = data["config_hash"]
    assert data["name"] == "solid_torus"
    assert data["k"] == 1
    assert data["intervals"] == [
        {"lo": 0.0, "hi": 0.0, "lo_open": False, "hi_open": False, "text": "{0}", "provenance": ["0:0"]}
    ]
    assert data["caveats"] == ["irreducibility_assumed"]
    assert data["tracking"] is None
    assert data["metadata"]["config"]["n_samples"] == 8
    assert csv_path.read_text(encoding="utf-8").startswith(f"# config_hash={digest}\n")
    assert f"config_hash={digest}" in svg_path.read_text(encoding="utf-8")
    out = capsys.readouterr().out
    assert "solid_torus" in out
    assert "orderable slopes" in out


def test_analyze_hash_is_stable(fixtures_dir, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"]
    for path, samples in zip(paths, ("8", "8", "16")):
        assert main(["analyze", str(fixtures_dir / "solid_torus.json"), "--samples", samples,
                     "--workers", "1", "--report", str(path), "--quiet"]) == EXIT_OK
    digests = [json.loads(p.read_text(encoding="utf-8"))["config_hash"] for p in paths]
    assert digests[0] == digests[1] != digests[2]


@pytest.mark.slow
def test_resume_with_other_config_is_rejected(fixtures_dir, tmp_path):
    frames = tmp_path / "frames.jsonl"
    common = ["--samples", "8", "--attempts", "40", "--bits", "128", "--workers", "1", "--quiet"]
    trefoil = str(fixtures_dir / "trefoil.json")
    assert main(["analyze", trefoil, "--frames", str(frames), *common]) == EXIT_OK
    assert main(["analyze", trefoil, "--resume", str(frames), "--seed", "9", *common]) == EXIT_INPUT
    assert main(["analyze", trefoil, "--resume", str(frames), *common]) == EXIT_OK
