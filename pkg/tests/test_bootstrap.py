"""Pairs-bootstrap bands: determinism, degenerate cases, failure policy."""

import csv

import numpy as np
import pytest

import semicontqr.bootstrap as bt
from semicontqr.errors import DomainError, EstimationError
from semicontqr.simulate import dgp_catalog, generate


@pytest.fixture(scope="module")
def dataset():
    return generate(dgp_catalog("gc", p0=0.2), 400, seed=11)


GRID = np.linspace(0.3, 0.85, 7)


def _bands(data, **kw):
    args = dict(tau_list=[0.5, 0.7], x_grid=GRID, B=30, level=0.95, seed=5)
    args.update(kw)
    return bt.bootstrap_bands(data.x, data.y, "gaussian", "clayton", **args)


class TestDeterminism:
    def test_same_seed_identical(self, dataset):
        a = _bands(dataset)
        b = _bands(dataset)
        for ba, bb in zip(a, b):
            assert np.array_equal(ba.lower, bb.lower)
            assert np.array_equal(ba.upper, bb.upper)
            assert np.array_equal(ba.estimate, bb.estimate)

    def test_jobs_invariant(self, dataset):
        a = _bands(dataset, jobs=1)
        b = _bands(dataset, jobs=3)
        for ba, bb in zip(a, b):
            assert np.array_equal(ba.lower, bb.lower)
            assert np.array_equal(ba.upper, bb.upper)

    def test_different_seed_moves_bands(self, dataset):
        a = _bands(dataset, seed=5)
        b = _bands(dataset, seed=6)
        assert any(not np.array_equal(ba.lower, bb.lower) for ba, bb in zip(a, b))


class TestStructure:
    def test_one_band_per_tau_plus_pi0(self, dataset):
        bands = _bands(dataset)
        assert [b.tau for b in bands] == [0.5, 0.7, "pi0"]
        for band in bands:
            assert np.all(band.lower <= band.upper)
            assert band.b == 30
            assert band.level == 0.95

    def test_level_zero_collapses_to_median(self, dataset):
        bands = _bands(dataset, level=0.0, B=15)
        for band in bands:
            assert np.array_equal(band.lower, band.upper)

    def test_identical_resamples_collapse_to_point(self, dataset, monkeypatch):
        monkeypatch.setattr(bt, "_resample_indices",
                            lambda rng, n: np.arange(n))
        bands = _bands(dataset, B=2)
        for band in bands:
            assert np.array_equal(band.lower, band.upper)
            assert np.allclose(band.lower, band.estimate, atol=1e-12)

    def test_validation(self, dataset):
        with pytest.raises(DomainError):
            _bands(dataset, B=1)
        with pytest.raises(DomainError):
            _bands(dataset, level=1.0)


class TestFailurePolicy:
    def test_excess_refit_failures_abort(self, dataset, monkeypatch):
        real = bt.fit_two_part
        calls = {"n": 0}

        def flaky(*args, **kw):
            calls["n"] += 1
            if calls["n"] > 1:  # point fit succeeds, every refit fails
                raise EstimationError("synthetic refit failure")
            return real(*args, **kw)

        monkeypatch.setattr(bt, "fit_two_part", flaky)
        with pytest.raises(EstimationError, match="replicates"):
            _bands(dataset, B=20)

    def test_rare_failures_dropped_and_counted(self, dataset, monkeypatch):
        real = bt.fit_two_part
        calls = {"n": 0}

        def flaky(*args, **kw):
            calls["n"] += 1
            if calls["n"] == 2:  # exactly one bootstrap refit fails
                raise EstimationError("synthetic refit failure")
            return real(*args, **kw)

        monkeypatch.setattr(bt, "fit_two_part", flaky)
        bands = _bands(dataset, B=30)
        assert all(band.b == 29 for band in bands)


class TestCsv:
    def test_columns_and_row_count(self, dataset, tmp_path):
        bands = _bands(dataset, B=12)
        path = tmp_path / "bands.csv"
        bt.bands_to_csv(bands, path)
        rows = list(csv.DictReader(open(path)))
        assert tuple(rows[0].keys()) == bt.BAND_CSV_COLUMNS
        assert len(rows) == 3 * GRID.shape[0]
        taus = {row["tau"] for row in rows}
        assert taus == {"0.5", "0.7", "pi0"}
        for row in rows:
            assert float(row["lower"]) <= float(row["upper"])
            assert row["b"] == "12"
