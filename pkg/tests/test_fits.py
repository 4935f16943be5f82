import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from btcgmc import fits


def test_exponential_approach_recovers_rate():
    t = np.linspace(0, 60, 6001)
    y = np.exp(-0.1 * t) * np.cos(3 * t) + 1
    res = fits.fit_exponential_approach(t, y, 1.0)
    assert abs(res["Gamma"] - 0.1) < 0.005
    assert res.model_id == "exp_approach"
    assert res.window[0] > 0.3 * 60


def test_exponential_approach_needs_peaks():
    t = np.linspace(0, 10, 200)
    with pytest.raises(fits.FitError):
        fits.fit_exponential_approach(t, 1 + np.exp(-t), 1.0)


def test_damped_growth_recovers_generator():
    t = np.linspace(0, 80, 8001)
    y = t ** 0.5 * np.exp(-0.05 * t) * np.cos(2 * t) + 3
    res = fits.fit_damped_oscillation(t, y, 3.0, mode="growth")
    for name, ref in (("beta", 0.5), ("Gamma", 0.05), ("nu", 2.0)):
        assert abs(res[name] / ref - 1) < 0.05
    assert res.flags == []


def test_damped_decay_recovers_generator():
    t = np.linspace(0, 60, 6001)[1:]
    y = 2 * t ** -0.7 * np.exp(-0.03 * t) * np.cos(1.5 * t + 0.4) - 1
    res = fits.fit_damped_oscillation(t, y, -1.0, mode="decay")
    for name, ref in (("A", 2.0), ("alpha", 0.7), ("Gamma", 0.03), ("nu", 1.5), ("phi", 0.4)):
        assert abs(res[name] / ref - 1) < 0.05


def test_detrended_fit_ignores_slow_drift():
    t = np.linspace(0, 80, 8001)
    osc = t ** 0.5 * np.exp(-0.05 * t) * np.cos(2 * t)
    drift = 2 * (1 - np.exp(-0.2 * t))
    res = fits.fit_damped_oscillation(t, osc + drift + 3, 5.0, detrend=True)
    assert "detrended" in res.flags
    assert abs(res["nu"] / 2 - 1) < 0.02


def test_damped_fit_rejects_bad_input():
    t = np.linspace(0, 10, 500)
    with pytest.raises(ValueError):
        fits.fit_damped_oscillation(t, np.cos(t), 0.0, mode="sideways")
    with pytest.raises(fits.FitError):
        fits.fit_damped_oscillation(t, np.exp(-t), 0.0)


def test_damped_fit_falls_back_to_envelope():
    t = np.linspace(0, 60, 3001)
    y = np.exp(-0.1 * t) * np.cos(3 * t) + 1
    res = fits.fit_damped_oscillation(t, y, 1.0, max_nfev=1)
    assert "envelope_only" in res.flags
    assert np.isnan(res["A"])
    assert abs(res["Gamma"] - 0.1) < 0.01


def test_power_law_exact():
    x = np.array([10.0, 20, 40, 80])
    res = fits.fit_power_law(x, 2 / x)
    assert res["slope"] == pytest.approx(-1.0, abs=1e-12)
    assert res["intercept"] == pytest.approx(np.log(2), abs=1e-12)
    with pytest.raises(fits.FitError):
        fits.fit_power_law([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(fits.FitError):
        fits.fit_power_law([1.0], [1.0])


def test_fit_result_checks_parameter_names():
    with pytest.raises(ValueError):
        fits.FitResult("power_law", {"slope": 1.0}, {}, 0.0, (0, 1))


def test_frequency_estimators():
    t = np.linspace(0, 30, 3001)
    y = np.cos(2.5 * t) + 0.05 * t
    assert abs(fits.zero_crossing_frequency(t, y) - 2.5) < 0.01
    assert abs(fits.extrema_frequency(t, y) - 2.5) < 0.01
    with pytest.raises(fits.FitError):
        fits.zero_crossing_frequency(t, t)


def test_one_period_baseline_removes_oscillation():
    t = np.linspace(0, 40, 4001)
    mask, base = fits.one_period_baseline(t, 0.3 * t + np.sin(2 * t), 2.0)
    assert np.abs(base[mask] - 0.3 * t[mask]).max() < 0.01


def test_fits_are_deterministic():
    t = np.linspace(0, 80, 4001)
    y = t ** 0.5 * np.exp(-0.05 * t) * np.cos(2 * t) + 3
    a = fits.fit_damped_oscillation(t, y, 3.0)
    b = fits.fit_damped_oscillation(t, y, 3.0)
    assert a.params == b.params and a.uncertainties == b.uncertainties


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(0.01, 100), shift=st.floats(-10, 10))
def test_peaks_invariant_under_affine_rescaling(scale, shift):
    t = np.linspace(0, 50, 2501)
    y = np.exp(-0.08 * t) * np.cos(2.2 * t)
    ref = fits.oscillation_peaks(t, y, 0.0)
    assert np.array_equal(fits.oscillation_peaks(t, scale * y + shift, shift), ref)
