"""Tests for the analytic link MSE against independent oracles."""

import numpy as np
import pytest

from afrelay.channel import standard_complex
from afrelay.checks import conditional_empirical_mse, random_link_model
from afrelay.msemodel import (
    LinkModel,
    compute_pi,
    effective_noise,
    mse_floor,
    per_subcarrier_mse,
    signal_statistics,
    total_mse,
)


def make_model(k=1, **kwargs):
    rng = kwargs.pop("rng", np.random.default_rng(0))
    return random_link_model(rng, k=k, **kwargs)


class TestComputePi:
    def test_perfect_estimation(self):
        pi = compute_pi(np.eye(2, dtype=complex), np.eye(2), np.zeros((2, 2)))
        assert np.allclose(pi, np.eye(2))

    def test_error_floor_arithmetic(self):
        pi = compute_pi(np.eye(2, dtype=complex), np.eye(2), 0.5 * np.eye(2))
        assert np.allclose(pi, 2.0 * np.eye(2))
        r_x = pi + 1.0 * np.eye(2)
        assert np.allclose(r_x, 3.0 * np.eye(2))

    def test_structure_identity_plus_direct(self):
        rng = np.random.default_rng(1)
        h = standard_complex(rng, (3, 2))
        r_s = np.eye(2)
        psi = standard_complex(rng, (2, 2))
        psi = psi @ psi.conj().T
        pi = compute_pi(h, r_s, psi)
        residue = pi - h @ r_s @ h.conj().T
        scale = residue[0, 0].real
        assert scale >= 0
        assert np.abs(residue - scale * np.eye(3)).max() < 1e-12

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            compute_pi(np.eye(2, dtype=complex), np.eye(2), np.eye(3))


class TestAnalyticMse:
    def test_zero_equalizer_gives_source_power(self):
        model = make_model(k=3)
        f = standard_complex(np.random.default_rng(2), (3, 2, 2))
        g = np.zeros((3, 2, 2), dtype=complex)
        mse = per_subcarrier_mse(f, g, model)
        expected = np.array([np.trace(model.r_s[i]).real for i in range(3)])
        assert np.allclose(mse, expected, atol=1e-12)

    def test_scalar_flat_mmse_closed_form(self):
        # 1x1 antennas, perfect CSI: compare against the scalar MMSE notch.
        h_sr, h_rd, f = 0.8 - 0.3j, 1.1 + 0.2j, 0.9 + 0.5j
        p, s1, s2 = 1.3, 0.2, 0.4
        model = LinkModel(
            h_sr_hat=np.array([[[h_sr]]]),
            h_rd_hat=np.array([[[h_rd]]]),
            psi_sr=np.zeros((1, 1, 1)),
            psi_rd=np.zeros((1, 1, 1)),
            r_s=np.array([[[p]]], dtype=complex),
            sigma_n1_sq=s1,
            sigma_n2_sq=s2,
        )
        denom = abs(h_rd * f) ** 2 * (p * abs(h_sr) ** 2 + s1) + s2
        g_opt = p * np.conj(h_rd * f * h_sr) / denom
        mse_opt = p - p**2 * abs(h_rd * f * h_sr) ** 2 / denom
        out = per_subcarrier_mse(
            np.array([[[f]]]), np.array([[[g_opt]]]), model
        )
        assert abs(out[0] - mse_opt) < 1e-12

    def test_monte_carlo_oracle_random_filters(self):
        rng = np.random.default_rng(3)
        model = make_model(k=2, rng=rng, correlated=True, error_scale=0.05)
        f = 0.5 * standard_complex(rng, (2, 2, 2))
        g = 0.5 * standard_complex(rng, (2, 2, 2))
        analytic = float(per_subcarrier_mse(f, g, model).sum())

        class Sol:
            pass

        sol = Sol()
        sol.f, sol.g = f, g
        empirical = conditional_empirical_mse(model, sol, 100_000, rng)
        assert abs(empirical - analytic) / analytic < 0.02

    def test_total_is_k_times_single_for_identical_subcarriers(self):
        rng = np.random.default_rng(4)
        single = make_model(k=1, rng=rng)
        k = 4
        model = LinkModel(
            h_sr_hat=np.repeat(single.h_sr_hat, k, axis=0),
            h_rd_hat=np.repeat(single.h_rd_hat, k, axis=0),
            psi_sr=np.repeat(single.psi_sr, k, axis=0),
            psi_rd=np.repeat(single.psi_rd, k, axis=0),
            r_s=np.repeat(single.r_s, k, axis=0),
            sigma_n1_sq=single.sigma_n1_sq,
            sigma_n2_sq=single.sigma_n2_sq,
        )
        f1 = standard_complex(rng, (1, 2, 2))
        g1 = standard_complex(rng, (1, 2, 2))
        one = float(per_subcarrier_mse(f1, g1, single)[0])
        many = per_subcarrier_mse(
            np.repeat(f1, k, axis=0), np.repeat(g1, k, axis=0), model
        )
        assert np.allclose(many, one)
        assert abs(many.sum() - k * one) < 1e-10

    def test_perfect_csi_reduction(self):
        # With both error matrices zero the closed form collapses to the
        # plain squared-error expansion, computed here directly.
        rng = np.random.default_rng(5)
        model = make_model(k=2, rng=rng, error_scale=0.0)
        f = standard_complex(rng, (2, 2, 2))
        g = standard_complex(rng, (2, 2, 2))
        out = per_subcarrier_mse(f, g, model)
        for k in range(2):
            chain = g[k] @ model.h_rd_hat[k] @ f[k] @ model.h_sr_hat[k]
            err = chain - np.eye(2)
            direct = (
                np.trace(err @ model.r_s[k] @ err.conj().T).real
                + model.sigma_n1_sq
                * np.linalg.norm(g[k] @ model.h_rd_hat[k] @ f[k], "fro") ** 2
                + model.sigma_n2_sq * np.linalg.norm(g[k], "fro") ** 2
            )
            assert abs(out[k] - direct) < 1e-10

    def test_floor_bounds_any_filters(self):
        rng = np.random.default_rng(6)
        model = make_model(k=3, rng=rng, correlated=True, error_scale=0.02)
        floor = mse_floor(model)
        assert np.all(floor > 0)
        for trial in range(20):
            f = standard_complex(rng, (3, 2, 2))
            g = standard_complex(rng, (3, 2, 2))
            mse = per_subcarrier_mse(f, g, model)
            assert np.all(mse >= floor - 1e-9)

    def test_effective_noise_floor(self):
        rng = np.random.default_rng(7)
        model = make_model(k=1, rng=rng, correlated=True)
        _, r_x = signal_statistics(model)
        f = standard_complex(rng, (2, 2))
        eta = effective_noise(f, r_x[0], model.psi_rd[0], model.sigma_n2_sq)
        assert eta >= model.sigma_n2_sq
