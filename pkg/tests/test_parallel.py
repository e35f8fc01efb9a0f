"""Tests for the chunked joblib helpers."""

import threading

from src.core import parallel
from src.core.parallel import chunk_bounds, count_successes, map_ordered, worker_count


class TestChunkBounds:
    """Test class for contiguous chunking."""

    def test_covers_the_range(self):
        assert chunk_bounds(1000, 2) == [(0, 334), (334, 668), (668, 1000)]

    def test_small_totals_use_one_chunk(self):
        assert chunk_bounds(100, 8) == [(0, 100)]
        assert chunk_bounds(0, 8) == []

    def test_contiguous(self):
        bounds = chunk_bounds(123_457, 6)
        assert bounds[0][0] == 0 and bounds[-1][1] == 123_457
        assert all(a[1] == b[0] for a, b in zip(bounds, bounds[1:]))


class TestWorkers:
    """Test class for the worker cap."""

    def test_environment_cap(self, monkeypatch):
        monkeypatch.setenv("EVENINIT_MAX_WORKERS", "2")
        assert worker_count(8) == 2
        assert worker_count(1) == 1

    def test_uncapped(self, monkeypatch):
        monkeypatch.delenv("EVENINIT_MAX_WORKERS", raising=False)
        assert worker_count(5) == 5
        assert worker_count() >= 1


class TestCountSuccesses:
    """Test class for schedule-independent counting."""

    def test_sum_is_independent_of_workers(self):
        def multiples_of_seven(start, stop):
            return sum(1 for t in range(start, stop) if t % 7 == 0)

        serial = count_successes(multiples_of_seven, 50_000, workers=1)
        threaded = count_successes(multiples_of_seven, 50_000, workers=8)
        assert serial == threaded == len(range(0, 50_000, 7))

    def test_dispatches_through_joblib(self, monkeypatch):
        monkeypatch.setenv("EVENINIT_MAX_WORKERS", "3")
        calls = []

        class RecordingParallel:
            def __init__(self, n_jobs, prefer):
                calls.append((n_jobs, prefer))

            def __call__(self, tasks):
                return [fn(*args, **kwargs) for fn, args, kwargs in tasks]

        monkeypatch.setattr(parallel, "Parallel", RecordingParallel)
        assert count_successes(lambda start, stop: stop - start, 4096, workers=8) == 4096
        assert calls == [(3, "threads")]

    def test_serial_when_capped_to_one(self, monkeypatch):
        monkeypatch.setenv("EVENINIT_MAX_WORKERS", "1")
        seen = set()

        def count(start, stop):
            seen.add(threading.get_ident())
            return stop - start

        assert count_successes(count, 4096, workers=8) == 4096
        assert seen == {threading.get_ident()}


class TestMapOrdered:
    """Test class for ordered mapping."""

    def test_order_preserved(self):
        assert map_ordered(lambda x: x * x, range(20), workers=4) == [x * x for x in range(20)]

    def test_single_item(self):
        assert map_ordered(str, [3], workers=4) == ["3"]
