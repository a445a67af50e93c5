"""Stationary source generators: validation, oracles, reproducibility, and
distributional sanity at scale."""

import numpy as np
import pytest

from quantstab import (EmptyCoefficientsError, NonpositiveNoiseError,
                       SourceKind, SourceSpec, SourceStream, UnstableARError,
                       ar_spectral_radius, sample_paths, validate_spec)
from quantstab.diagnostics import batch_means_se


def iid_spec(**kw):
    return SourceSpec(kind=SourceKind.IID, coefficients=(), **kw)


def test_validate_iid_ok():
    validate_spec(iid_spec(noise_std=2.0, seed=1))


def test_validate_rejects_bad_noise():
    with pytest.raises(NonpositiveNoiseError):
        validate_spec(iid_spec(noise_std=0.0))
    with pytest.raises(NonpositiveNoiseError):
        validate_spec(iid_spec(noise_std=-1.0))
    with pytest.raises(NonpositiveNoiseError):
        validate_spec(iid_spec(noise_std=float("nan")))


def test_validate_rejects_empty_coefficients():
    with pytest.raises(EmptyCoefficientsError):
        validate_spec(SourceSpec(kind=SourceKind.AR, coefficients=()))
    with pytest.raises(EmptyCoefficientsError):
        validate_spec(SourceSpec(kind=SourceKind.MA, coefficients=()))


def test_ar_spectral_radius_oracle():
    # order 1: radius = |alpha_1|
    assert ar_spectral_radius((0.5,)) == pytest.approx(0.5)
    # order 2: companion [[0.9, 0.05], [1, 0]] has eigenvalues
    # (0.9 +- sqrt(0.81 + 0.2)) / 2; the larger root is the radius
    expected = (0.9 + np.sqrt(0.81 + 0.2)) / 2
    assert ar_spectral_radius((0.9, 0.05)) == pytest.approx(expected, rel=1e-12)


def test_validate_rejects_unstable_ar():
    with pytest.raises(UnstableARError):
        validate_spec(SourceSpec(kind=SourceKind.AR, coefficients=(1.0,)))
    with pytest.raises(UnstableARError):
        validate_spec(SourceSpec(kind=SourceKind.AR, coefficients=(1.2,)))
    # stable AR(2) passes
    validate_spec(SourceSpec(kind=SourceKind.AR, coefficients=(0.9, 0.05)))


def test_zero_noise_ar_decay():
    # with the W hook silenced, x_t = 8 * 0.5^(t+1) from initial lag 8
    spec = SourceSpec(kind=SourceKind.AR, coefficients=(0.5,))
    stream = SourceStream(spec, burn_in=0, noise=lambda n: np.zeros(n),
                          initial_lags=[8.0])
    got = stream.take(6)
    expected = 8.0 * 0.5 ** np.arange(1, 7)
    np.testing.assert_allclose(got, expected, rtol=0, atol=0)


def test_ma_hand_convolution():
    # coefficients (1, 2) with W = 1, 1, 1, ...: first sample 1*1 + 2*1 = 3
    # then constant 3; distinct lags expose the convolution order
    spec = SourceSpec(kind=SourceKind.MA, coefficients=(1.0, 2.0))
    feed = iter([np.array([5.0]),         # pre-drawn lag w_{-1} = 5
                 np.array([1.0]), np.array([1.0])])
    stream = SourceStream(spec, burn_in=0, noise=lambda n: next(feed))
    # sample 0: 1*1 + 2*5 = 11; sample 1: 1*1 + 2*1 = 3
    assert stream.next_sample() == 11.0
    assert stream.next_sample() == 3.0


def test_mean_shift_added_to_output_only():
    spec = SourceSpec(kind=SourceKind.AR, coefficients=(0.5,), mean_shift=10.0)
    stream = SourceStream(spec, burn_in=0, noise=lambda n: np.zeros(n),
                          initial_lags=[8.0])
    got = stream.take(4)
    # the recursion runs centered; the shift rides on top
    np.testing.assert_allclose(got, 10.0 + 8.0 * 0.5 ** np.arange(1, 5))


def test_stream_reproducible():
    spec = iid_spec(seed=123)
    a = SourceStream(spec, burn_in=100).take(10_000)
    b = SourceStream(spec, burn_in=100).take(10_000)
    np.testing.assert_array_equal(a, b)


def test_sample_paths_reproducible_and_independent():
    spec = SourceSpec(kind=SourceKind.AR, coefficients=(0.7,), seed=5)
    x1 = sample_paths(spec, 4, 1000, master_seed=5)
    x2 = sample_paths(spec, 4, 1000, master_seed=5)
    np.testing.assert_array_equal(x1, x2)
    # distinct trajectories differ
    assert not np.array_equal(x1[0], x1[1])
    # a different master seed gives a different ensemble
    x3 = sample_paths(spec, 4, 1000, master_seed=6)
    assert not np.array_equal(x1, x3)


def test_sample_paths_path0_matches_stream():
    for spec in (iid_spec(seed=7),
                 SourceSpec(kind=SourceKind.AR, coefficients=(0.6, 0.2), seed=7),
                 SourceSpec(kind=SourceKind.MA, coefficients=(1.0, 0.5, 0.25), seed=7)):
        stream = SourceStream(spec, burn_in=50)
        x = sample_paths(spec, 1, 200, burn_in=50)
        np.testing.assert_array_equal(x[0], stream.take(200))


def test_iid_moments_at_scale():
    spec = iid_spec(noise_std=2.0, mean_shift=1.0, seed=17)
    x = sample_paths(spec, 1, 1_000_000, burn_in=0).ravel()
    se = batch_means_se(x)
    assert abs(x.mean() - 1.0) < 5 * se
    assert abs(x.std() - 2.0) < 0.01


def test_ar1_autocorrelation_at_scale():
    # AR(1) with alpha = 0.8: lag-1 autocorrelation 0.8,
    # stationary variance 1 / (1 - 0.64)
    spec = SourceSpec(kind=SourceKind.AR, coefficients=(0.8,), seed=29)
    x = sample_paths(spec, 1, 1_000_000).ravel()
    var = x.var()
    rho = np.mean(x[1:] * x[:-1]) / var
    assert var == pytest.approx(1.0 / (1.0 - 0.64), rel=0.02)
    assert rho == pytest.approx(0.8, abs=0.01)


def test_ma_variance_at_scale():
    # MA coefficients (1, 0.5): variance 1 + 0.25, lag-1 autocov 0.5
    spec = SourceSpec(kind=SourceKind.MA, coefficients=(1.0, 0.5), seed=31)
    x = sample_paths(spec, 1, 1_000_000).ravel()
    assert x.var() == pytest.approx(1.25, rel=0.02)
    assert np.mean(x[1:] * x[:-1]) == pytest.approx(0.5, abs=0.01)
