import json

import numpy as np
import pytest

from centerspace import (
    Alert,
    ParameterError,
    SystemParams,
    UnlabeledMonitor,
    build_label_map,
    enumerate_centers,
    pack_code,
    predict,
)

from conftest import ref_cosine_argmax


def sparse_map():
    p = SystemParams(4, 1, 1)
    centers = list(enumerate_centers(p))
    labeled = centers[:3]
    return p, centers, build_label_map(labeled, range(3), p)


def unlabeled_queries(rng, centers, target_idx, count, sigma=0.2):
    """Noisy draws around one center, kept only when it stays the argmax."""
    out = []
    target = centers[target_idx].astype(float)
    while len(out) < count:
        q = target + sigma * rng.standard_normal(4)
        q /= np.linalg.norm(q)
        if ref_cosine_argmax(q, centers) == target_idx:
            out.append(q)
    return np.array(out)


class TestThresholdSemantics:
    def test_single_alert_at_crossing(self, rng):
        p, centers, lm = sparse_map()
        target = 7  # unlabeled
        Z = unlabeled_queries(rng, centers, target, 12)
        preds = predict(Z, lm)
        mon = UnlabeledMonitor(lm, threshold=10)
        alerts = [mon.observe(pr) for pr in preds]
        fired = [a for a in alerts if a is not None]
        assert len(fired) == 1
        assert alerts[9] is fired[0]  # exactly at the 10th hit
        assert fired[0].count == 10
        assert fired[0].first_seen == 0 and fired[0].last_seen == 9

    def test_labeled_stream_stays_silent(self):
        p, centers, lm = sparse_map()
        preds = predict(np.array(centers[:3], dtype=float), lm)
        mon = UnlabeledMonitor(lm, threshold=1)
        assert all(mon.observe(pr) is None for pr in preds)
        assert mon.counts == {}

    def test_alert_code_never_labeled(self, rng):
        p, centers, lm = sparse_map()
        Z = unlabeled_queries(rng, centers, 9, 5)
        mon = UnlabeledMonitor(lm, threshold=3)
        for alert in mon.observe_all(predict(Z, lm)):
            assert pack_code(alert.code) not in lm.entries

    def test_deterministic_given_stream(self, rng):
        p, centers, lm = sparse_map()
        Z = unlabeled_queries(rng, centers, 10, 8)
        a1 = list(UnlabeledMonitor(lm, 4).observe_all(predict(Z, lm)))
        a2 = list(UnlabeledMonitor(lm, 4).observe_all(predict(Z, lm)))
        assert a1 == a2

    def test_observer_does_not_change_predictions(self, rng):
        p, centers, lm = sparse_map()
        Z = rng.standard_normal((50, 4))
        preds = predict(Z, lm)
        mon = UnlabeledMonitor(lm, threshold=2)
        list(mon.observe_all(preds))
        assert preds == predict(Z, lm)

    def test_invalid_config_rejected(self):
        _, _, lm = sparse_map()
        with pytest.raises(ParameterError):
            UnlabeledMonitor(lm, threshold=0)
        with pytest.raises(ParameterError):
            UnlabeledMonitor(lm, threshold=1, window=0)


class TestWindow:
    def test_counts_bounded_by_window(self, rng):
        p, centers, lm = sparse_map()
        Z = unlabeled_queries(rng, centers, 7, 20)
        mon = UnlabeledMonitor(lm, threshold=100, window=5)
        for pr in predict(Z, lm):
            mon.observe(pr)
            assert all(c <= 5 for c in mon.counts.values())

    def test_expiry_rearms_alerts(self, rng):
        p, centers, lm = sparse_map()
        hot = predict(unlabeled_queries(rng, centers, 7, 2), lm)
        cold = predict(np.array(centers[:3], dtype=float), lm)
        mon = UnlabeledMonitor(lm, threshold=2, window=3)
        stream = [hot[0], hot[1]] + list(cold) + [hot[0], hot[1]]
        alerts = [mon.observe(pr) for pr in stream]
        assert alerts[1] is not None  # first crossing
        assert alerts[-1] is not None  # re-armed after full expiry
        assert sum(a is not None for a in alerts) == 2

    def test_no_rearm_while_hits_remain(self, rng):
        p, centers, lm = sparse_map()
        hot = predict(unlabeled_queries(rng, centers, 7, 6), lm)
        mon = UnlabeledMonitor(lm, threshold=2, window=10)
        alerts = [mon.observe(pr) for pr in hot]
        assert sum(a is not None for a in alerts) == 1


class TestToyScenario:
    def test_clustered_queries_alert_the_unseen_center(self, rng):
        # three labeled classes, queries cluster at an unlabeled fourth
        # center; the monitor must name that center and the classifier must
        # never assign any of the three labels
        p, centers, lm = sparse_map()
        target_idx = 7
        Z = unlabeled_queries(rng, centers, target_idx, 12, sigma=0.15)
        preds = predict(Z, lm)
        assert all(pr.label == -1 for pr in preds)
        mon = UnlabeledMonitor(lm, threshold=10)
        alerts = list(mon.observe_all(preds))
        assert len(alerts) == 1
        from centerspace import decode

        assert np.array_equal(decode(alerts[0].code, p), centers[target_idx])

    def test_alert_json_lines(self, rng):
        p, centers, lm = sparse_map()
        Z = unlabeled_queries(rng, centers, 7, 3)
        mon = UnlabeledMonitor(lm, threshold=3)
        (alert,) = list(mon.observe_all(predict(Z, lm)))
        payload = json.loads(alert.to_json())
        assert payload["count"] == 3
        assert payload["code"] == {"maxes": [2], "mins": [1]}
