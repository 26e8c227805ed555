"""Small test doubles shared across test modules."""

import numpy as np


class ScriptedRng:
    """Stand-in for a numpy Generator with queued draws.

    Each method pops the next scripted value, asserting it is legal for
    the requested range so a bad script fails loudly.
    """

    def __init__(self, randoms=(), integers=(), normals=(), choices=()):
        self._randoms = list(randoms)
        self._integers = list(integers)
        self._normals = list(normals)
        self._choices = list(choices)

    def random(self):
        return self._randoms.pop(0)

    def integers(self, lo, hi):
        value = self._integers.pop(0)
        assert lo <= value < hi, f"scripted draw {value} outside [{lo}, {hi})"
        return value

    def normal(self):
        return self._normals.pop(0)

    def choice(self, options, size=None, replace=True):
        value = self._choices.pop(0)
        if size is None:
            assert value in tuple(options)
            return value
        return np.asarray(value)


class CountingEvaluator:
    """Returns a fixed series and counts how often it is asked."""

    def __init__(self, series=(0.5, 0.6, 0.7)):
        self.calls = 0
        self.series = list(series)

    def evaluate(self, phenotype, cfg):
        self.calls += 1
        return np.asarray(self.series, dtype=float)


class FakeTransport:
    """Records sent messages and replays scripted replies."""

    def __init__(self, replies):
        self.sent = []
        self.closed = False
        self._replies = list(replies)

    def send(self, record):
        self.sent.append(record)

    def recv(self):
        return self._replies.pop(0)

    def close(self):
        self.closed = True
