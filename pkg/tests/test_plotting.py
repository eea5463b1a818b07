from trimin.analysis import SweepRecord
from trimin.lattice import build_patch
from trimin.plotting import save_figure, save_trend_overview


def _recs():
    return [SweepRecord(x / 10, (1, 4), x / 50, 0.0, gap=10.0 ** -x, dCdl=x * (4 - x) / 10, alpha=a)
            for x in range(8) for a in (0.0, 0.5)]


def test_figures_render(tmp_path):
    for q in ("concurrence", "eof", "gap", "derivative"):
        p = save_figure(_recs(), tmp_path / f"{q}.png", q, title=q)
        assert p.stat().st_size > 1000


def test_empty_figure(tmp_path):
    assert save_figure([], tmp_path / "e.png").exists()


def test_trend_overview(tmp_path):
    lat = build_patch(1, impurity=(4, 1.0))
    trends = {(b.i, b.j): (1 if 4 in (b.i, b.j) else -1) for b in lat.bonds}
    assert save_trend_overview(lat, trends, tmp_path / "t.png").stat().st_size > 1000
