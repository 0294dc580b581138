"""Acceptance gate: one test per shipped claim, one PASS/FAIL line each.

Each test prints ``PASS``/``FAIL`` plus its measured numbers, then
asserts. Two claims about the bundled 17-model fixture do not hold for
the runtimes and accuracies the fixture actually contains; those tests
report the measured values and fail rather than widening their windows.
The exact fixture statistics are frozen (and oracle-checked) in
tests/test_stats.py.
"""

import io
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
from synthetic_models import make_model_store, noise_ladder, write_labels

from abductrank import (
    EmbeddingRole,
    EmbeddingStore,
    HeadParams,
    StoreKind,
    loss_and_grad,
    predict_sim,
    read_embedding_store,
    softmax,
    spearman,
    t_p_value,
    table1_fixture_path,
    write_embedding_store,
)
from abductrank.cli import main
from abductrank.stats import correlate_runs, fractional_ranks, read_runs_csv

from test_stats import (
    FIXTURE_P_R,
    FIXTURE_P_RHO,
    FIXTURE_R,
    FIXTURE_RHO,
    FIXTURE_SPEEDUP,
)


def _report(name, failures):
    print(f"{'FAIL' if failures else 'PASS'}  {name}")
    for item in failures:
        print(f"      {item}")
    assert not failures, "; ".join(failures)


def _window(failures, label, value, lo, hi):
    if not lo <= value <= hi:
        failures.append(f"{label} = {value:.5f} outside [{lo}, {hi}]")


def test_fixture_correlation_windows(tmp_path):
    """Correlation stage on the bundled 17-model fixture."""
    out = tmp_path / "report.json"
    start = time.perf_counter()
    code = main(["correlate", "--runs", str(table1_fixture_path()), "--out", str(out)])
    elapsed = time.perf_counter() - start
    report = json.loads(out.read_text())

    failures = []
    if code != 0:
        failures.append(f"correlate exited {code}")
    for key, frozen in (
        ("pearson_r", FIXTURE_R),
        ("pearson_p", FIXTURE_P_R),
        ("spearman_rho", FIXTURE_RHO),
        ("spearman_p", FIXTURE_P_RHO),
    ):
        if abs(report[key] - frozen) > 1e-12:
            failures.append(f"{key} = {report[key]!r} drifted from frozen {frozen!r}")
    _window(failures, "pearson_r", report["pearson_r"], 0.64, 0.66)
    _window(failures, "pearson_p", report["pearson_p"], 0.004, 0.006)
    _window(failures, "spearman_rho", report["spearman_rho"], 0.66, 0.68)
    _window(failures, "spearman_p", report["spearman_p"], 0.002, 0.004)
    if elapsed >= 1.0:
        failures.append(f"stage took {elapsed:.2f}s (budget 1s)")
    if failures and abs(report["pearson_r"] - FIXTURE_R) <= 1e-12:
        failures.append(
            "note: the windowed r/p targets are rounded headline values; the "
            "fixture's accuracy columns reproducibly give r=0.62555 (p=0.00724); "
            "the rank-based window does hold"
        )
    _report("fixture correlation: r/p windows + frozen oracle values, <1s", failures)


def test_fixture_speedup_window(tmp_path):
    """Mean per-model speedup from the bundled fixture."""
    report = correlate_runs(read_runs_csv(table1_fixture_path()))
    failures = []
    if abs(report.mean_speedup - FIXTURE_SPEEDUP) > 1e-9:
        failures.append(
            f"mean_speedup = {report.mean_speedup!r} drifted from frozen {FIXTURE_SPEEDUP!r}"
        )
    _window(failures, "mean_speedup", report.mean_speedup, 560.0, 680.0)
    if failures and abs(report.mean_speedup - FIXTURE_SPEEDUP) <= 1e-9:
        failures.append(
            "note: the fixture's runtime columns give 1138.19x; the windowed "
            "target matches a runtime parse that drops the hours digit of the "
            "h:mm:ss column (mean 569.2x), not the durations themselves"
        )
    _report("fixture mean speedup within [560, 680]", failures)


def test_gradient_finite_differences():
    """100 random head/batch cases, central differences, step 1e-5."""
    rng = np.random.default_rng(2024)
    h = 1e-5
    worst = 0.0
    start = time.perf_counter()
    for _ in range(100):
        d = int(rng.integers(2, 33))
        m = int(rng.integers(2, 9))
        head = HeadParams(W=0.5 * rng.normal(size=(2, d)), b=0.5 * rng.normal(size=2))
        X = rng.normal(size=(m, d))
        y = rng.integers(0, 2, size=m)
        _, gW, gb = loss_and_grad(head, X, y)

        def loss_at(W, b):
            return loss_and_grad(HeadParams(W=W, b=b), X, y)[0]

        for k in range(2):
            for j in range(d):
                Wp, Wm = head.W.copy(), head.W.copy()
                Wp[k, j] += h
                Wm[k, j] -= h
                num = (loss_at(Wp, head.b) - loss_at(Wm, head.b)) / (2 * h)
                worst = max(worst, abs(gW[k, j] - num) / max(abs(num), abs(gW[k, j]), 1e-10))
            bp, bm = head.b.copy(), head.b.copy()
            bp[k] += h
            bm[k] -= h
            num = (loss_at(head.W, bp) - loss_at(head.W, bm)) / (2 * h)
            worst = max(worst, abs(gb[k] - num) / max(abs(num), abs(gb[k]), 1e-10))
    elapsed = time.perf_counter() - start

    failures = []
    if worst >= 1e-4:
        failures.append(f"max relative gradient error {worst:.2e} (limit 1e-4)")
    if elapsed >= 10.0:
        failures.append(f"took {elapsed:.1f}s (budget 10s)")
    _report(
        f"gradients vs finite differences: 100 cases, worst rel err {worst:.2e}",
        failures,
    )


def test_synthetic_pipeline_tracks_agree(tmp_path):
    """Grid + correlate over 12 synthetic models spanning noise levels."""
    start = time.perf_counter()
    n_models = 12
    models = []
    for k, noise in enumerate(noise_ladder(n_models)):
        name = f"synth-{k:02d}"
        train_store, train_labels = make_model_store(
            name, n=120, d=16, noise=float(noise), seed=100 + k
        )
        dev_store, dev_labels = make_model_store(
            name, n=100, d=16, noise=float(noise), seed=900 + k
        )
        write_embedding_store(train_store, tmp_path / f"{name}.train.emb")
        write_labels(tmp_path / f"{name}.train.lst", train_labels)
        write_embedding_store(dev_store, tmp_path / f"{name}.dev.emb")
        write_labels(tmp_path / f"{name}.dev.lst", dev_labels)
        models.append(
            {
                "model_id": name,
                "train_embeddings": f"{name}.train.emb",
                "train_labels": f"{name}.train.lst",
                "dev_embeddings": f"{name}.dev.emb",
                "dev_labels": f"{name}.dev.lst",
                "grid": [
                    {"learning_rate": 5e-2, "batch_size": 32},
                    {"learning_rate": 1e-2, "batch_size": 32},
                ],
            }
        )
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"models": models, "defaults": {"seed": 0}}))

    out_dir = tmp_path / "out"
    grid_code = main(["grid", "--manifest", str(manifest), "--out", str(out_dir)])
    report_path = tmp_path / "report.json"
    corr_code = main(
        ["correlate", "--runs", str(out_dir / "runs.csv"), "--out", str(report_path)]
    )
    elapsed = time.perf_counter() - start
    report = json.loads(report_path.read_text())

    failures = []
    if grid_code != 0:
        failures.append(f"grid exited {grid_code}")
    if corr_code != 0:
        failures.append(f"correlate exited {corr_code}")
    if report["n"] != n_models:
        failures.append(f"expected {n_models} models in report, got {report['n']}")
    if report["pearson_r"] <= 0.5:
        failures.append(f"pearson r = {report['pearson_r']:.4f} not > 0.5")
    if elapsed >= 120.0:
        failures.append(f"pipeline took {elapsed:.1f}s (budget 120s)")
    _report(
        f"synthetic 12-model pipeline: tracks correlate r={report['pearson_r']:.3f} "
        f"in {elapsed:.1f}s",
        failures,
    )


def test_cli_outputs_byte_reproducible(tmp_path):
    """Every subcommand, run twice with the same seed, matches byte-for-byte."""
    failures = []
    store, labels = make_model_store("det", n=30, d=8, noise=0.5, seed=7)
    emb = tmp_path / "det.emb"
    lab = tmp_path / "det.lst"
    write_embedding_store(store, emb)
    write_labels(lab, labels)

    def twice(name, argv, outputs):
        blobs = []
        for tag in ("a", "b"):
            code = main([arg.format(tag=tag) for arg in argv])
            if code != 0:
                failures.append(f"{name} run {tag} exited {code}")
                return
            blobs.append([Path(str(o).format(tag=tag)).read_bytes() for o in outputs])
        if blobs[0] != blobs[1]:
            failures.append(f"{name} outputs differ between identical runs")

    twice(
        "predict-sim",
        ["predict-sim", "--embeddings", str(emb), "--labels", str(lab),
         "--out", str(tmp_path / "sim.{tag}.json"), "--no-timing"],
        [tmp_path / "sim.{tag}.json"],
    )
    twice(
        "train-head",
        ["train-head",
         "--train-embeddings", str(emb), "--train-labels", str(lab),
         "--dev-embeddings", str(emb), "--dev-labels", str(lab),
         "--lr", "1e-2", "--batch-size", "8", "--seed", "3",
         "--out", str(tmp_path / "head.{tag}.json"), "--no-timing"],
        [tmp_path / "head.{tag}.json", tmp_path / "head.{tag}.result.json"],
    )
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "models": [{
            "model_id": "det",
            "train_embeddings": "det.emb", "train_labels": "det.lst",
            "dev_embeddings": "det.emb", "dev_labels": "det.lst",
            "grid": [{"learning_rate": 1e-2, "batch_size": 8}],
        }],
    }))
    twice(
        "grid",
        ["grid", "--manifest", str(manifest), "--out", str(tmp_path / "grid-{tag}"),
         "--seed", "0", "--no-timing"],
        [tmp_path / "grid-{tag}" / "det.grid.json", tmp_path / "grid-{tag}" / "runs.csv"],
    )
    twice(
        "correlate",
        ["correlate", "--runs", str(table1_fixture_path()),
         "--out", str(tmp_path / "rep.{tag}.json")],
        [tmp_path / "rep.{tag}.json"],
    )
    _report("CLI byte-reproducibility across all four subcommands", failures)


def test_cli_entry_point_runs():
    """The module is runnable as an executable without the test harness."""
    proc = subprocess.run(
        [sys.executable, "-m", "abductrank.cli", "correlate",
         "--runs", str(table1_fixture_path()), "--out", "/dev/null"],
        capture_output=True, text=True, timeout=120,
    )
    failures = []
    if proc.returncode != 0:
        failures.append(f"exit {proc.returncode}: {proc.stderr.strip()[:200]}")
    elif "pearson r=" not in proc.stdout:
        failures.append("summary line missing from stdout")
    _report("CLI usable as a standalone executable", failures)


def test_invariant_suites():
    """Five property suites, 1000 random cases each."""
    failures = []

    # 1. Similarity predictions are invariant to positive rescaling.
    rng = np.random.default_rng(1)
    for _ in range(1000):
        d = int(rng.integers(2, 12))
        obs, h1, h2 = rng.normal(size=(3, d))
        a, b, c = rng.uniform(1e-3, 1e3, size=3)
        base = predict_sim(obs, h1, h2)
        scaled = predict_sim(a * obs, b * h1, c * h2)
        if scaled.choice is not base.choice or abs(scaled.score_h1 - base.score_h1) > 1e-12:
            failures.append(f"similarity scale invariance broke at d={d}")
            break

    # 2. Softmax normalizes and is shift-invariant.
    rng = np.random.default_rng(2)
    for _ in range(1000):
        logits = rng.uniform(-60.0, 60.0, size=int(rng.integers(2, 6)))
        probs = softmax(logits)
        shift = softmax(logits + float(rng.uniform(-100, 100)))
        if abs(float(np.sum(probs)) - 1.0) > 1e-12 or np.max(np.abs(probs - shift)) > 1e-12:
            failures.append(f"softmax invariants broke for logits {logits}")
            break

    # 3. Rank correlation ignores strictly monotone transforms.
    rng = np.random.default_rng(3)
    grid = np.arange(2000) * 1e-3
    for _ in range(1000):
        n = int(rng.integers(3, 12))
        x = rng.choice(grid, size=n, replace=False)
        y = rng.choice(grid, size=n, replace=False)
        if spearman(np.exp(x), y**3 + 2 * y) != spearman(x, y):
            failures.append("spearman changed under a monotone transform")
            break

    # 4. p-values are sign-symmetric and shrink with |r|.
    rng = np.random.default_rng(4)
    for _ in range(1000):
        n = int(rng.integers(3, 40))
        r1, r2 = np.sort(rng.uniform(0.0, 0.999, size=2))
        if t_p_value(r2, n) != t_p_value(-r2, n):
            failures.append(f"p-value asymmetric at r={r2}, n={n}")
            break
        if r1 < r2 and not t_p_value(r2, n) < t_p_value(r1, n):
            failures.append(f"p-value not decreasing between r={r1} and r={r2}")
            break

    # 5. Store write/read roundtrips identically.
    rng = np.random.default_rng(5)
    for case in range(1000):
        dim = int(rng.integers(1, 5))
        kind = StoreKind.POOLED if rng.random() < 0.5 else StoreKind.TOKEN
        records = {}
        for _ in range(int(rng.integers(1, 4))):
            key = (int(rng.integers(0, 6)), EmbeddingRole(int(rng.integers(0, 5))))
            shape = (dim,) if kind is StoreKind.POOLED else (int(rng.integers(1, 4)), dim)
            records[key] = (1000.0 * rng.normal(size=shape)).astype(np.float32)
        store = EmbeddingStore(f"m{case}", dim, kind, records,
                               separator="|", extra={"truncated": case})
        buf = io.BytesIO()
        write_embedding_store(store, buf)
        back = read_embedding_store(io.BytesIO(buf.getvalue()))
        same = (
            back.model_id == store.model_id
            and back.extra == store.extra
            and set(back.records) == set(records)
            and all(np.array_equal(back.records[k], records[k]) for k in records)
        )
        if not same:
            failures.append(f"store roundtrip diverged on case {case}")
            break

    _report("invariant suites (5 properties x 1000 random cases)", failures)
