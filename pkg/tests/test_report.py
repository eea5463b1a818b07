import ast

import pytest

from trimin.analysis import SweepRecord
from trimin.report import CSV_HEADER, emit_plot_script, read_csv, write_csv


def test_header_only(tmp_path):
    p = write_csv([], tmp_path / "empty.csv")
    assert p.read_text() == ",".join(CSV_HEADER) + "\n"


def test_single_row(tmp_path):
    p = write_csv([SweepRecord(0.0, (1, 4), 0.0, 0.0)], tmp_path / "one.csv")
    lines = p.read_text().splitlines()
    assert lines[1] == "0,1,4,0,0,,,0,1"
    assert p.read_text().endswith("\n")


def test_sorting_and_precision(tmp_path):
    recs = [
        SweepRecord(2.0, (1, 4), 0.1234567890123456, 0.5, gap=1e-9, dCdl=-0.25, alpha=0.5),
        SweepRecord(1.0, (1, 4), 0.2, 0.1, alpha=0.5, converged=False),
        SweepRecord(2.0, (1, 2), 0.3, 0.2, alpha=0.0),
    ]
    p = write_csv(recs, tmp_path / "r.csv")
    lines = p.read_text().splitlines()[1:]
    assert lines[0].startswith("2,1,2,")
    assert lines[1].startswith("1,1,4,") and lines[1].endswith(",0")
    assert "0.123456789012" in lines[2]
    back = read_csv(p)
    assert back[2].gap == 1e-9 and back[2].dCdl == -0.25
    assert not back[1].converged


def test_deterministic_bytes(tmp_path):
    recs = [SweepRecord(x / 10, (1, 2), x / 7, x / 9) for x in range(5)]
    a = write_csv(recs, tmp_path / "a.csv").read_bytes()
    b = write_csv(list(reversed(recs)), tmp_path / "b.csv").read_bytes()
    assert a == b


def test_failed_write_leaves_nothing(tmp_path):
    bad = SweepRecord(1.0, (1, 2), 0.1, 0.1)
    bad.C = "not a number"
    p = tmp_path / "bad.csv"
    with pytest.raises((TypeError, ValueError)):
        write_csv([bad], p)
    assert not p.exists()


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        write_csv([], tmp_path / "missing" / "x.csv")


def test_read_rejects_other_headers(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)


def test_script_for_empty_csv(tmp_path):
    p = write_csv([], tmp_path / "e.csv")
    text = emit_plot_script(p)
    assert "WARNING" in text
    ast.parse(text)


def test_script_two_curves_runs(tmp_path):
    recs = [SweepRecord(x / 10, pair, x / 20, 0.0) for x in range(5) for pair in ((1, 4), (5, 10))]
    p = write_csv(recs, tmp_path / "fig.csv")
    text = emit_plot_script(p)
    assert "concurrence" in text and "WARNING" not in text
    exec(compile(text, "plot", "exec"), {})
    assert (tmp_path / "fig.png").stat().st_size > 0


def test_script_marks_derivative_peaks(tmp_path):
    recs = [SweepRecord(x / 10, (1, 4), 0.0, 0.0, dCdl=float(x)) for x in range(5)]
    p = write_csv(recs, tmp_path / "d.csv")
    text = emit_plot_script(p)
    assert "dC_dlambda" in text and "MARK_PEAKS = True" in text
    exec(compile(text, "plot", "exec"), {})


def test_script_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        emit_plot_script(tmp_path / "nope.csv")
    p = write_csv([], tmp_path / "e.csv")
    with pytest.raises(ValueError):
        emit_plot_script(p, "entropy")
