"""Stream monitor flagging repeated hits on unlabeled centers.

A run of predictions landing on the same unlabeled center suggests the
queries belong to a class the label map has never seen. The monitor is a
pure observer: it counts unlabeled hits per center code, optionally over a
sliding window of recent predictions, and emits one alert per code when the
count crosses the threshold (re-arming once the code's hits have all left
the window). Predictions themselves are never altered.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass
from typing import Iterable, Iterator, Optional

from .classifier import LabelMap, Prediction
from .errors import ParameterError
from .systems import CenterCode, pack_code, unpack_code


@dataclass(frozen=True)
class Alert:
    """Threshold crossing for one unlabeled center."""

    code: CenterCode
    count: int
    first_seen: int
    last_seen: int

    def to_json(self) -> str:
        d = asdict(self)
        d["code"] = {"maxes": list(self.code.maxes), "mins": list(self.code.mins)}
        return json.dumps(d, sort_keys=True)


class UnlabeledMonitor:
    """Counts unlabeled-center hits and raises alerts at a threshold.

    window, when set, is a sliding length in predictions (labeled ones age
    entries out too). Counts only ever track codes absent from the map.
    """

    def __init__(
        self,
        label_map: LabelMap,
        threshold: int = 10,
        window: Optional[int] = None,
    ):
        if threshold < 1:
            raise ParameterError("threshold must be positive")
        if window is not None and window < 1:
            raise ParameterError("window must be positive when given")
        self.label_map = label_map
        self.threshold = threshold
        self.window = window
        self.counts: dict[int, int] = {}
        self._first_seen: dict[int, int] = {}
        self._last_seen: dict[int, int] = {}
        self._fired: set[int] = set()
        self._seen = 0
        self._recent: deque[Optional[int]] = deque()

    def observe(self, p: Prediction) -> Optional[Alert]:
        """Consume one prediction; returns an alert when a code crosses."""
        index = self._seen
        self._seen += 1
        key = None
        if p.label < 0:
            key = pack_code(p.code)
            if key in self.label_map.entries:
                raise ParameterError(
                    "prediction flagged unlabeled but its code is in the map"
                )
            self.counts[key] = self.counts.get(key, 0) + 1
            self._first_seen.setdefault(key, index)
            self._last_seen[key] = index
        if self.window is not None:
            self._recent.append(key)
            if len(self._recent) > self.window:
                old = self._recent.popleft()
                if old is not None:
                    left = self.counts[old] - 1
                    if left:
                        self.counts[old] = left
                    else:
                        del self.counts[old]
                        self._first_seen.pop(old, None)
                        self._fired.discard(old)  # re-arm on window expiry
        if key is not None and key not in self._fired:
            if self.counts[key] >= self.threshold:
                self._fired.add(key)
                return Alert(
                    unpack_code(key, self.label_map.params),
                    self.counts[key],
                    self._first_seen[key],
                    self._last_seen[key],
                )
        return None

    def observe_all(self, predictions: Iterable[Prediction]) -> Iterator[Alert]:
        for p in predictions:
            alert = self.observe(p)
            if alert is not None:
                yield alert
