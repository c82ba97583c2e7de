import numpy as np
import pytest

from radar_qkernel.bench import RunRecord, aggregate
from radar_qkernel.report import (
    aggregate_csv,
    ci_halfwidth,
    clean_table_markdown,
    emit_report,
    noise_table_markdown,
    raw_csv,
    read_raw_csv,
)


@pytest.fixture
def records():
    gen = np.random.default_rng(0)
    out = []
    for task in ("uav", "fall"):
        for d in (2, 4, 6, 8):
            for kernel in ("rbf", "quantum"):
                for sigma in (0.0, 0.1, 0.25, 0.5):
                    if sigma > 0 and d == 2:
                        continue
                    for seed in (7, 11, 21, 42, 84):
                        acc = float(np.round(gen.uniform(0.5, 1.0), 4))
                        out.append(RunRecord(task, d, kernel, sigma, seed, acc, 150))
    return out


def test_csv_headers(records):
    assert raw_csv(records).splitlines()[0] == "task,d,kernel,sigma,seed,accuracy,n_test"
    assert aggregate_csv(aggregate(records)).splitlines()[0] == (
        "task,d,kernel,sigma,mean_accuracy,std_accuracy,n_seeds"
    )


def test_single_seed_std_is_blank():
    text = aggregate_csv(aggregate([RunRecord("uav", 2, "rbf", 0.0, 7, 0.5, 4)]))
    assert text.splitlines()[1] == "uav,2,rbf,0.0,0.500000,,1"


def test_raw_round_trip(records, tmp_path):
    path = tmp_path / "raw.csv"
    path.write_text(raw_csv(records))
    assert read_raw_csv(path) == records


def test_raw_reader_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("task,d\nuav,2\n")
    with pytest.raises(ValueError, match="header"):
        read_raw_csv(bad)
    bad.write_text("task,d,kernel,sigma,seed,accuracy,n_test\nuav,2,rbf\n")
    with pytest.raises(ValueError, match="fields"):
        read_raw_csv(bad)


def test_clean_table_layout(records):
    table = clean_table_markdown(aggregate(records))
    lines = table.splitlines()
    assert lines[0] == "| d | UAV, 3-class RBF-SVC | UAV, 3-class QSVC | Fall, 2-class RBF-SVC | Fall, 2-class QSVC |"
    assert [ln.split("|")[1].strip() for ln in lines[2:]] == ["2", "4", "6", "8"]
    for ln in lines[2:]:
        cells = [c.strip() for c in ln.split("|")[2:-1]]
        assert all("±" in c for c in cells)
        # One bold cell per task.
        assert sum(c.startswith("**") for c in cells[:2]) == 1
        assert sum(c.startswith("**") for c in cells[2:]) == 1


def test_noise_table_layout(records):
    lines = noise_table_markdown(aggregate(records)).splitlines()
    assert lines[0] == "| Task | d | σ=0.00 | σ=0.10 | σ=0.25 | σ=0.50 |"
    assert len(lines) == 2 + 2 * 3
    assert all("/" in c for c in lines[2].split("|")[3:-1])


def test_ci_halfwidth():
    [g] = aggregate([RunRecord("uav", 2, "rbf", 0.0, s, a, 10) for s, a in ((7, 1.0), (11, 0.0))])
    assert ci_halfwidth(g) == pytest.approx(1.96 * np.sqrt(0.5) / np.sqrt(2))


def test_emit_report_files_and_determinism(records, tmp_path):
    a = emit_report(tmp_path / "a", records)
    b = emit_report(tmp_path / "b", records)
    names = sorted(p.name for p in a)
    assert names == sorted(
        ["raw.csv", "aggregate.csv", "tables.md"]
        + [f"accuracy_vs_d_{t}.svg" for t in ("uav", "fall")]
        + [f"accuracy_vs_sigma_{t}_d{d}.svg" for t in ("uav", "fall") for d in (4, 6, 8)]
    )
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    svg = (tmp_path / "a" / "accuracy_vs_d_uav.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 2


def test_emit_report_rejects_unknown_format(records, tmp_path):
    with pytest.raises(ValueError):
        emit_report(tmp_path, records, formats=("pdf",))
