"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from wcpd.cli import main
from wcpd.cpd import (
    DetectorConfig,
    OnlineDetector,
    StatTrace,
    apply_filter,
    detect,
    detect_peaks,
    estimate_matched_filter,
    sliding_statistic,
)
from wcpd.empirical import NULL, build_empirical, w2t_statistic, wasserstein2
from wcpd.metrics import cp_auc, cp_f1, label_accuracy
from wcpd.numeric import eigh_symmetric, hungarian
from wcpd.series import TimeSeries
from wcpd.simgen import DistSpec, SeriesSpec, generate, sample
from wcpd.tssc import AffinityMatrix, SegmentLabeling, cluster_segments, spectral_cluster

from helpers import adjusted_rand, brute_force_assignment, lp_wasserstein2


def report(number, name, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"[acceptance] criterion {number} ({name}): {status} — {detail}")
    assert passed, f"criterion {number} ({name}): {detail}"


STANDARD_NORMAL = DistSpec("normal", 0.0, 1.0)

# mean change, variance change, and a laplace change with a mean shift
FOUR_SEGMENT_SPECS = (
    STANDARD_NORMAL,
    DistSpec("normal", 2.0, 1.0),
    DistSpec("normal", 2.0, 3.0),
    DistSpec("laplace", -1.0, float(np.sqrt(2.0))),
)


def four_segment_series(seed, length=400):
    return generate(
        SeriesSpec(segments=tuple((spec, length) for spec in FOUR_SEGMENT_SPECS), seed=seed)
    )


@pytest.fixture(scope="module")
def filter_b100():
    return estimate_matched_filter(beta=100, ensemble_size=200, seed=1000)


@pytest.fixture(scope="module")
def filter_b25():
    return estimate_matched_filter(beta=25, ensemble_size=60, seed=1001)


def test_criterion_1_null_calibration():
    trials = 2000
    values = np.empty(trials)
    for trial in range(trials):
        x = build_empirical(sample(STANDARD_NORMAL, 500, 2 * trial))
        y = build_empirical(sample(STANDARD_NORMAL, 500, 2 * trial + 1))
        values[trial] = w2t_statistic(x, y)
    mean = float(values.mean())
    rejection = float((values > NULL.reject_threshold_05).mean())
    report(
        1,
        "null calibration",
        0.150 <= mean <= 0.182 and 0.03 <= rejection <= 0.07,
        f"mean={mean:.4f} (window [0.150, 0.182]), "
        f"rejection@0.462={rejection:.4f} (window [0.03, 0.07])",
    )


def test_criterion_2_transport_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        na, nb = rng.integers(1, 9, size=2)
        a = build_empirical(rng.normal(scale=2.0, size=na), weights=rng.random(na) + 1e-3)
        b = build_empirical(rng.normal(scale=2.0, size=nb), weights=rng.random(nb) + 1e-3)
        mine = wasserstein2(a, b)
        oracle = lp_wasserstein2(a, b)
        worst = max(worst, abs(mine - oracle) / max(1.0, oracle))
    report(2, "transport LP oracle", worst <= 1e-9, f"worst relative error {worst:.2e}")


def test_criterion_3_matched_filter_efficacy(filter_b100):
    truth = [400, 800, 1200]
    delta = 50
    runs = 50
    wins = 0
    f1_raw = np.empty(runs)
    f1_filtered = np.empty(runs)
    auc_raw = np.empty(runs)
    auc_filtered = np.empty(runs)
    for run_index in range(runs):
        series = four_segment_series(seed=3000 + run_index)
        raw = sliding_statistic(series, beta=100)
        filtered = apply_filter(raw, filter_b100)
        _, _, f1_raw[run_index] = cp_f1(
            detect_peaks(raw, NULL.reject_threshold_05), truth, delta
        )
        _, _, f1_filtered[run_index] = cp_f1(
            detect_peaks(filtered, NULL.reject_threshold_05), truth, delta
        )
        auc_raw[run_index] = cp_auc(raw, truth, delta)
        auc_filtered[run_index] = cp_auc(filtered, truth, delta)
        if f1_filtered[run_index] >= f1_raw[run_index]:
            wins += 1
    mean_f1 = float(f1_filtered.mean())
    tradeoff = auc_filtered.mean() < auc_raw.mean() and f1_filtered.mean() > f1_raw.mean()
    report(
        3,
        "matched filter efficacy",
        wins >= 45 and mean_f1 >= 0.9 and tradeoff,
        f"filtered>=raw F1 in {wins}/50 runs (need >=45), mean filtered F1 {mean_f1:.3f} "
        f"(need >=0.9), AUC {auc_raw.mean():.3f}->{auc_filtered.mean():.3f} down while "
        f"F1 {f1_raw.mean():.3f}->{f1_filtered.mean():.3f} up: {tradeoff}",
    )


def test_criterion_4_online_equivalence(filter_b25):
    beta = 25
    config = DetectorConfig(beta=beta, filter=filter_b25)
    specs = (
        STANDARD_NORMAL,
        DistSpec("normal", 3.0, 1.0),
        DistSpec("normal", 0.0, 3.0),
    )
    mismatches = 0
    delay_violations = 0
    total_emissions = 0
    for seed in range(4000, 4020):
        series = generate(SeriesSpec(segments=tuple((s, 150) for s in specs), seed=seed))
        offline = detect(series, config).change_points
        detector = OnlineDetector(config)
        streamed = []
        for arrival in range(len(series)):
            emitted = detector.step(series.data[arrival])
            if emitted is not None:
                streamed.append((emitted, arrival))
                total_emissions += 1
                if arrival - emitted != 2 * beta:
                    delay_violations += 1
        tail = detector.finalize()
        if [cp for cp, _ in streamed] + tail != offline:
            mismatches += 1
    report(
        4,
        "offline/online equivalence",
        mismatches == 0 and delay_violations == 0 and total_emissions > 0,
        f"{mismatches} mismatched series out of 20, {delay_violations} delay violations "
        f"over {total_emissions} emissions (every delay exactly {2 * beta})",
    )


def test_criterion_5_spectral_and_eigen():
    values = np.full((15, 15), np.exp(-5.0))
    truth = np.repeat([0, 1, 2], 5)
    for block in range(3):
        sl = slice(5 * block, 5 * block + 5)
        values[sl, sl] = 1.0
    labels = spectral_cluster(AffinityMatrix(values), K=3, seed=0)
    ari = adjusted_rand(labels, truth)

    rng = np.random.default_rng(5001)
    worst_recon = 0.0
    worst_orth = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 21))
        m = rng.normal(size=(n, n))
        m = (m + m.T) / 2.0
        w, v = eigh_symmetric(m)
        worst_recon = max(worst_recon, float(np.linalg.norm(v @ np.diag(w) @ v.T - m)))
        worst_orth = max(worst_orth, float(np.linalg.norm(v.T @ v - np.eye(n))))
    report(
        5,
        "spectral clustering correctness",
        ari == 1.0 and worst_recon <= 1e-8 and worst_orth <= 1e-10,
        f"planted-block ARI {ari:.3f} (need 1.0), worst reconstruction {worst_recon:.2e} "
        f"(need <=1e-8), worst orthonormality {worst_orth:.2e} (need <=1e-10)",
    )


def test_criterion_6_hungarian_exactness():
    rng = np.random.default_rng(6001)
    failures = 0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        cost = rng.normal(size=(n, n))
        perm = hungarian(cost)
        total = sum(cost[i, perm[i]] for i in range(n))
        _, oracle_total = brute_force_assignment(cost)
        if abs(total - oracle_total) > 1e-9:
            failures += 1
    report(
        6,
        "assignment exactness",
        failures == 0,
        f"{failures} deviations from the exhaustive-permutation minimum in 100 matrices",
    )


def test_criterion_7_tssc_end_to_end(filter_b100):
    classes = (STANDARD_NORMAL, DistSpec("normal", 5.0, 1.0), DistSpec("normal", 0.0, 4.0))
    order = [classes[i % 3] for i in range(8)]
    series = generate(SeriesSpec(segments=tuple((s, 400) for s in order), seed=7001))

    with_truth = cluster_segments(series, series.change_points, K=3, beta=100, seed=7)
    accuracy_truth = label_accuracy(with_truth, series.labels, 3)

    config = DetectorConfig(beta=100, filter=filter_b100)
    detected = detect(series, config).change_points
    with_detected = cluster_segments(series, detected, K=3, beta=100, seed=7)
    accuracy_detected = label_accuracy(with_detected, series.labels, 3)
    report(
        7,
        "segment clustering end to end",
        accuracy_truth == 1.0 and accuracy_detected >= 0.95,
        f"accuracy with true boundaries {accuracy_truth:.3f} (need 1.0), with detected "
        f"boundaries {accuracy_detected:.3f} (need >=0.95, {len(detected)} detections)",
    )


def test_criterion_8_metric_properties():
    rng = np.random.default_rng(8001)
    auc_ok = True
    for _ in range(20):
        values = np.full(204, np.nan)
        values[2:-2] = rng.normal(size=200)
        trace = StatTrace(values, beta=2, filtered=True)
        truth = sorted(int(t) for t in rng.integers(10, 190, size=3))
        base = cp_auc(trace, truth, delta=6)
        transformed = StatTrace(
            np.where(np.isnan(values), np.nan, np.exp(values) + 5.0 * values),
            beta=2,
            filtered=True,
        )
        if cp_auc(transformed, truth, delta=6) != base:
            auc_ok = False

    precision, recall, f1 = cp_f1([110, 150, 290], [100, 300], delta=20)
    f1_ok = (
        precision == pytest.approx(2 / 3)
        and recall == 1.0
        and f1 == pytest.approx(0.8)
    )

    accuracy_ok = True
    truth_labels = rng.integers(0, 3, size=90)
    base_labels = np.array([0, 1, 2, 1, 0])
    cps = [20, 40, 60, 75]
    base_acc = label_accuracy(SegmentLabeling(cps, base_labels, 3), truth_labels, 3)
    for shift in (1, 2):
        permuted = SegmentLabeling(cps, (base_labels + shift) % 3, 3)
        if label_accuracy(permuted, truth_labels, 3) != base_acc:
            accuracy_ok = False

    report(
        8,
        "metric property suite",
        auc_ok and f1_ok and accuracy_ok,
        f"AUC monotone invariance {auc_ok}, hand-worked F1 {f1_ok}, "
        f"label accuracy permutation invariance {accuracy_ok}",
    )


def test_criterion_9_cli_determinism(tmp_path):
    spec = {
        "seed": 9,
        "dimension": 1,
        "segments": [
            {"family": "normal", "location": 0, "scale": 1, "length": 120},
            {"family": "normal", "location": 3, "scale": 1, "length": 120},
            {"family": "laplace", "location": 3, "scale": 2, "length": 120},
        ],
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))

    def run_all(tag):
        base = tmp_path / tag
        base.mkdir()
        data = base / "data.csv"
        filt = base / "filter.json"
        rc = [
            main(["simulate", "--spec", str(spec_path), "--out", str(data)]),
            main(
                [
                    "calibrate-filter", "--beta", "20", "--ensemble", "30",
                    "--seed", "2", "--out", str(filt),
                ]
            ),
            main(
                [
                    "detect", "--input", str(data), "--time-column", "t",
                    "--label-column", "label", "--beta", "20",
                    "--filter", str(filt), "--out-dir", str(base / "det"),
                ]
            ),
            main(
                [
                    "cluster", "--input", str(data), "--time-column", "t",
                    "--label-column", "label", "--beta", "20", "--k", "3",
                    "--seed", "0", "--change-points", str(data) + ".cps",
                    "--out-dir", str(base / "clu"),
                ]
            ),
            main(
                [
                    "evaluate", "--predicted", str(base / "det/change_points.txt"),
                    "--truth", str(data) + ".cps", "--delta", "20",
                    "--trace", str(base / "det/trace.csv"),
                    "--predicted-labels", str(base / "clu/labels.csv"),
                    "--truth-labels", str(data) + ".labels",
                    "--k", "3", "--beta", "20", "--lambda", "0.462",
                    "--out", str(base / "report.txt"),
                ]
            ),
        ]
        assert rc == [0, 0, 0, 0, 0]
        return base

    first = run_all("run1")
    second = run_all("run2")
    compared = 0
    different = []
    for file_first in sorted(first.rglob("*")):
        if not file_first.is_file():
            continue
        relative = file_first.relative_to(first)
        file_second = second / relative
        compared += 1
        if file_first.read_bytes() != file_second.read_bytes():
            different.append(str(relative))
    report(
        9,
        "CLI determinism",
        compared >= 8 and not different,
        f"{compared} output files compared byte for byte, mismatches: {different or 'none'}",
    )
