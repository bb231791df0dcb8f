import filecmp

import pytest

from primespec import cli
from primespec import io as pio
from primespec.gapstats import scan_gaps


@pytest.mark.parametrize("text,value", [("2^10", 1024), ("1e9", 10**9), ("12345", 12345), ("10^3", 1000),
                                        ("1_000", 1000)])
def test_parse_int(text, value):
    assert pio.parse_int(text) == value


def test_parse_number_and_errors():
    assert pio.parse_number("2.5e-3") == 0.0025
    assert pio.parse_number("2^34") == 2.0**34
    with pytest.raises(ValueError):
        pio.parse_int("1.5")
    with pytest.raises(ValueError):
        pio.parse_number("abc")


def test_checkpoint_grammar():
    assert pio.parse_checkpoints("2^15..2^17") == [2**15, 2**16, 2**17]
    assert pio.parse_checkpoints("1e6, 2^20,1000") == [1000, 10**6, 2**20]
    with pytest.raises(ValueError):
        pio.parse_checkpoints("2^17..2^15")
    with pytest.raises(ValueError):
        pio.parse_checkpoints("3^2..3^4")


def test_labels():
    assert pio.tau_filename(2**34) == "tau_x34.csv"
    assert pio.tau_filename(10**6) == "tau_x1000000.csv"


def _files(d):
    return sorted(p.name for p in d.iterdir())


def test_scan_outputs_and_manifest(tmp_path):
    out = tmp_path / "s"
    assert cli.main(["scan", "--limit", "2^20", "--out", str(out)]) == 0
    names = _files(out)
    assert [f"tau_x{k}.csv" for k in range(15, 21)] == [n for n in names if n.startswith("tau")]
    m = pio.read_manifest(out)
    assert m["command"] == "scan" and m["pi.x20"] == "82025" and m["gmax.x20"] == "114"
    assert m["outputs"].split(",") == sorted(n for n in names if n != "manifest.txt")
    assert list(m)[-1] == "outputs"
    entries = pio.read_checkpoint_index(out)
    assert [t.x for t, _ in entries] == [2**k for k in range(15, 21)]
    assert all(t.identity_holds() for t, _ in entries)


def test_scan_rerun_and_resume_byte_identical(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    cli.main(["scan", "--limit", "2^19", "--out", str(a)])
    cli.main(["scan", "--limit", "2^19", "--out", str(b)])
    cli.main(["scan", "--limit", "2^19", "--checkpoints", "2^15..2^16", "--out", str(c)])
    # a resumed run over the full checkpoint list lands on the same files
    cli.main(["scan", "--limit", "2^19", "--out", str(c), "--resume"])
    for other in (b, c):
        cmp = filecmp.dircmp(a, other)
        assert not cmp.diff_files and not cmp.left_only and not cmp.right_only
        _, mismatch, errors = filecmp.cmpfiles(a, other, _files(a), shallow=False)
        assert not mismatch and not errors


def test_scan_env_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(pio.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    assert cli.main(["scan", "--limit", "2^16"]) == 0
    runs = list((tmp_path / "root").iterdir())
    assert len(runs) == 1 and runs[0].name.startswith("scan-")
    assert (runs[0] / "manifest.txt").exists()


def test_corrupted_table_detected_on_load(tmp_path, capsys):
    out = tmp_path / "s"
    cli.main(["scan", "--limit", "2^16", "--out", str(out)])
    p = out / "tau_x16.csv"
    lines = p.read_text().splitlines()
    lines[1] = "2,1"
    p.write_text("\n".join(lines) + "\n")
    assert cli.main(["analyze", "--scan", str(out), "--out", str(tmp_path / "a")]) == 3
    assert "pi" in capsys.readouterr().err


def test_malformed_csv_reports_line(tmp_path, capsys):
    out = tmp_path / "s"
    cli.main(["scan", "--limit", "2^16", "--out", str(out)])
    p = out / "tau_x15.csv"
    p.write_text("d,tau\n2,10\n4,zz\n")
    assert cli.main(["analyze", "--scan", str(out), "--out", str(tmp_path / "a")]) == 3
    assert "tau_x15.csv:3" in capsys.readouterr().err


def test_gap_table_csv_roundtrip(tmp_path):
    t = scan_gaps(1000, [1000]).tables[-1]
    pio.write_gap_table(tmp_path, t)
    pio.write_checkpoint_index(tmp_path, [(t, 997)])
    [(r, lp)] = pio.read_checkpoint_index(tmp_path)
    assert r == t and lp == 997


def test_usage_errors(tmp_path):
    assert cli.main(["rigidity", "--mode", "sampled", "--x", "1e9", "--out", str(tmp_path)]) == 2
    assert cli.main(["analyze", "--out", str(tmp_path)]) == 2
    assert cli.main(["scan", "--limit", "100", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["rigidity", "--x", "1e6"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["scan", "--limit", "two"])
    assert exc.value.code == 2


def test_resource_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["scan", "--limit", "2^16", "--out", str(blocker / "sub")]) == 4


def test_analyze_outputs(tmp_path):
    s = tmp_path / "s"
    cli.main(["scan", "--limit", "2^20", "--out", str(s)])
    a = tmp_path / "a"
    assert cli.main(["analyze", "--scan", str(s), "--x", "2^20", "--cosine", "1000", "--spectrum", "1024",
                     "--histogram", "1e5", "--gallagher", "1e5,100", "--out", str(a)]) == 0
    names = set(_files(a))
    assert {"overlay_x20.csv", "scaled_x20.csv", "expfit.csv", "cosine_fit.csv", "spectrum.csv",
            "histogram.csv", "gallagher.csv", "manifest.txt"} <= names
    assert (a / "overlay_x20.csv").read_text().splitlines()[0] == "d,tau_measured,tau_predicted,residual"
    assert (a / "expfit.csv").read_text().splitlines()[0] == "x,alpha_or_a,beta_or_s,residual_ss"
    spec = [l.split(",") for l in (a / "spectrum.csv").read_text().splitlines()[1:]]
    peak = max(spec, key=lambda r: float(r[1]))
    assert abs(float(peak[0]) - 6) < 0.05
    m = pio.read_manifest(a)
    assert m["param.gallagher"] == "100000,100"
    alpha = float((a / "cosine_fit.csv").read_text().splitlines()[1].split(",")[1])
    assert abs(alpha - 1.515) < 0.01


def test_rigidity_modes(tmp_path):
    r = tmp_path / "r"
    assert cli.main(["rigidity", "--mode", "sampled", "--x", "1e6", "--h", "100", "--L-max", "2^8",
                     "--out", str(r)]) == 0
    rows = (r / "rigidity.csv").read_text().splitlines()
    assert rows[0] == "L,delta3,method,x,h,ensemble_size" and rows[1].split(",")[2] == "sampled"
    # the staircase written by the run feeds the table-ingest path and gives the same curve
    r2 = tmp_path / "r2"
    assert cli.main(["rigidity", "--mode", "sampled", "--pi-table", str(r / "staircase.csv"),
                     "--L-max", "2^8", "--out", str(r2)]) == 0
    assert (r2 / "rigidity.csv").read_text() == (r / "rigidity.csv").read_text()
    u = tmp_path / "u"
    assert cli.main(["rigidity", "--mode", "unfolded", "--x", "1e5", "--L-max", "2^9", "--out", str(u)]) == 0
    c1, c2 = tmp_path / "c1", tmp_path / "c2"
    args = ["rigidity", "--mode", "cramer", "--samples", "5", "--x", "1e5", "--L-max", "2^9", "--seed", "4",
            "--dump-samples"]
    assert cli.main(args + ["--out", str(c1), "--workers", "1"]) == 0
    assert cli.main(args + ["--out", str(c2), "--workers", "2"]) == 0
    for name in ("ensemble.csv", "rigidity.csv", "samples.csv", "manifest.txt"):
        assert (c1 / name).read_bytes() == (c2 / name).read_bytes()
    assert pio.read_manifest(c1)["seed"] == "4"


def test_misaligned_pi_table(tmp_path):
    p = tmp_path / "pi.csv"
    p.write_text("x,pi\n0,0\n10,4\n25,9\n")
    assert cli.main(["rigidity", "--mode", "sampled", "--pi-table", str(p), "--out", str(tmp_path / "o")]) == 3


@pytest.mark.parametrize("mode,col", [("probability", "probability"), ("max", "relative")])
def test_histogram_normalisation(tmp_path, mode, col):
    a = tmp_path / mode
    assert cli.main(["analyze", "--histogram", "1e5", "--normalize", mode, "--out", str(a)]) == 0
    rows = (a / "histogram.csv").read_text().splitlines()
    assert rows[0] == f"bin_centre,count,{col}"
    h = [float(r.split(",")[2]) for r in rows[1:]]
    if mode == "max":
        assert max(h) == 1.0
    else:
        assert abs(sum(h) * 0.1 - 1) < 1e-12
