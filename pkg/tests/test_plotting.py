import numpy as np

from hdgl.plotting import plot_score_distributions, render_report, write_repeat_table


def nodeclass_report():
    return {
        "task": "nodeclass",
        "repeats": [
            {"repeat": r, "seed": r, "accuracy": 0.9 + r / 100, "work": {},
             "timings": {"encode": 0.1, "embed": 0.2, "fit": 0.01, "infer": 0.02}}
            for r in range(3)
        ],
        "summary": {"accuracy": {"mean": 0.91, "std": 0.008}},
    }


def test_render_nodeclass(tmp_path):
    paths = render_report(nodeclass_report(), tmp_path)
    assert {p.name for p in paths} == {"repeats.tsv", "accuracy.png", "timings.png"}
    for p in paths:
        assert p.stat().st_size > 0
    assert (tmp_path / "accuracy.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_render_incremental(tmp_path):
    report = {
        "task": "incremental",
        "repeats": [
            {"step": t, "labels": list(range(t + 1)), "new_members": 5, "n_test": 10,
             "accuracy": 0.8, "work": {}, "timings": {"fit": 0.01, "infer": 0.01, "total": 0.02}}
            for t in range(1, 4)
        ],
    }
    names = {p.name for p in render_report(report, tmp_path)}
    assert names == {"repeats.tsv", "incremental.png"}


def test_repeat_table_columns(tmp_path):
    path = write_repeat_table(nodeclass_report(), tmp_path / "t.tsv")
    header, *rows = path.read_text().splitlines()
    assert header.split("\t") == ["repeat", "seed", "accuracy",
                                  "time_embed", "time_encode", "time_fit", "time_infer"]
    assert len(rows) == 3


def test_score_histogram(tmp_path):
    g = np.random.default_rng(0)
    path = plot_score_distributions(g.random(50), g.integers(0, 2, 50), tmp_path / "s.png")
    assert path.exists()
