import numpy as np
import pytest

from mqfb.filterbank import (
    ChannelCoefficients,
    FilterBankSpec,
    Kernel,
    NotPolynomial,
    analyze,
    check_pr,
    check_q_orthogonality,
    frame_bounds,
    lazy_spec,
    make_context,
    orthogonal_cosine_spec,
    pr_conditions,
    synthesize,
    zero_dc_wrap,
)
from mqfb.graphs import (
    combinatorial_laplacian,
    degrees,
    normalized_laplacian,
    random_partition,
)
from mqfb.synthetic import random_bipartite_graph, random_connected_graph


def comb_context(n, seed, mode="dense", **kw):
    g = random_connected_graph(n, seed=seed)
    m = combinatorial_laplacian(g)
    p = random_partition(n, seed)
    return make_context(m, p, mode=mode, degrees=degrees(g), **kw)


class TestLazySpec:
    def test_pr_identity_at_zero(self):
        s = lazy_spec()
        assert s.g0(0.0) * s.h0(0.0) + s.g1(0.0) * s.h1(0.0) == 2.0

    def test_alias_identity_everywhere(self):
        lam = np.linspace(0, 2, 101)
        _, e2 = pr_conditions(lazy_spec(), lam)
        np.testing.assert_allclose(e2, 0, atol=1e-14)

    def test_biorthogonality_identities(self):
        s = lazy_spec()
        lam = np.linspace(0, 2, 1001)
        np.testing.assert_allclose(s.h0(lam), s.g1(2 - lam), atol=1e-14)
        np.testing.assert_allclose(s.h1(lam), s.g0(2 - lam), atol=1e-14)


class TestOrthogonalCosineSpec:
    def test_endpoint_values(self):
        s = orthogonal_cosine_spec()
        assert s.h0(0.0) == pytest.approx(np.sqrt(2))
        assert s.h1(0.0) == pytest.approx(0.0, abs=1e-15)
        assert s.h0(2.0) == pytest.approx(0.0, abs=1e-15)
        assert s.h1(2.0) == pytest.approx(np.sqrt(2))

    def test_midpoint(self):
        s = orthogonal_cosine_spec()
        assert s.h0(1.0) == pytest.approx(1.0)
        assert s.h1(1.0) == pytest.approx(1.0)
        assert s.h0(1.0) ** 2 + s.h1(1.0) ** 2 == pytest.approx(2.0)

    def test_poly_mode_rejected(self):
        with pytest.raises(NotPolynomial):
            orthogonal_cosine_spec(mode="poly")


class TestAnalyzeSynthesize:
    def test_lazy_low_channel_is_subsample(self):
        ctx = comb_context(30, 1, mode="poly")
        x = np.random.default_rng(0).standard_normal(30)
        c = analyze(lazy_spec(), ctx, x)
        np.testing.assert_array_equal(c.a, x[ctx.partition.a_idx])

    def test_constant_signal_zero_detail(self):
        ctx = comb_context(30, 2, mode="poly")
        c = analyze(lazy_spec(), ctx, np.ones(30))
        assert np.max(np.abs(c.d)) < 1e-12

    def test_modes_agree_on_polynomial_spec(self):
        g = random_connected_graph(60, seed=3)
        m = combinatorial_laplacian(g)
        p = random_partition(60, 3)
        dense = make_context(m, p, mode="dense")
        poly = make_context(m, p, mode="poly")
        x = np.random.default_rng(1).standard_normal(60)
        cd = analyze(lazy_spec(), dense, x)
        cp = analyze(lazy_spec(), poly, x)
        np.testing.assert_allclose(cd.a, cp.a, atol=1e-8)
        np.testing.assert_allclose(cd.d, cp.d, atol=1e-8)

    def test_zero_coefficients_zero_signal(self):
        ctx = comb_context(20, 4, mode="poly")
        na = ctx.partition.a_idx.size
        c = ChannelCoefficients(a=np.zeros(na), d=np.zeros(20 - na))
        assert np.max(np.abs(synthesize(lazy_spec(), ctx, c))) == 0.0

    def test_lazy_roundtrip_sparse_path(self):
        ctx = comb_context(500, 5, mode="poly")
        x = np.random.default_rng(2).standard_normal(500)
        xr = synthesize(lazy_spec(), ctx, analyze(lazy_spec(), ctx, x))
        assert np.linalg.norm(xr - x) <= 1e-8 * np.linalg.norm(x)

    def test_ortho_roundtrip_dense_path(self):
        ctx = comb_context(200, 6, mode="dense")
        spec = orthogonal_cosine_spec()
        x = np.random.default_rng(3).standard_normal(200)
        xr = synthesize(spec, ctx, analyze(spec, ctx, x))
        assert np.linalg.norm(xr - x) <= 1e-8 * np.linalg.norm(x)

    def test_critical_sampling(self):
        for n, seed in [(30, 1), (75, 2), (120, 3)]:
            ctx = comb_context(n, seed, mode="poly")
            c = analyze(lazy_spec(), ctx, np.random.default_rng(seed).standard_normal(n))
            assert c.a.shape[0] + c.d.shape[0] == n

    def test_multichannel_signals(self):
        ctx = comb_context(40, 7, mode="poly")
        x = np.random.default_rng(4).standard_normal((40, 3))
        xr = synthesize(lazy_spec(), ctx, analyze(lazy_spec(), ctx, x))
        np.testing.assert_allclose(xr, x, atol=1e-10)


class TestCheckPr:
    def test_lazy_passes(self):
        ctx = comb_context(50, 8, mode="dense")
        rep = check_pr(lazy_spec(), ctx)
        assert rep["passed"]
        assert rep["max_identity_violation"] <= 1e-12

    def test_broken_spec_detected(self):
        broken = FilterBankSpec(
            h0=Kernel(coeffs=(1.0,)),
            h1=Kernel(coeffs=(0.0, 1.0)),
            g0=Kernel(coeffs=(2.1, -1.0)),  # 2 - lam + 0.1
            g1=Kernel(coeffs=(1.0,)),
        )
        ctx = comb_context(50, 9, mode="dense")
        rep = check_pr(broken, ctx)
        assert not rep["passed"]
        assert rep["max_identity_violation"] == pytest.approx(0.1, rel=1e-6)

    def test_ortho_passes_many_graphs(self):
        spec = orthogonal_cosine_spec()
        for seed in range(20):
            ctx = comb_context(40, seed + 50, mode="dense")
            rep = check_pr(spec, ctx, trials=3)
            assert rep["passed"], rep

    def test_pr_iff_roundtrip(self):
        # a spec violating the spectral identities must fail the round trip too
        rng = np.random.default_rng(11)
        for seed in range(5):
            coeffs = {
                k: Kernel(coeffs=tuple(rng.uniform(-1, 1, 2)))
                for k in ("h0", "h1", "g0", "g1")
            }
            spec = FilterBankSpec(**coeffs)
            ctx = comb_context(60, seed + 200, mode="dense")
            rep = check_pr(spec, ctx, trials=5)
            analytic_ok = (rep["max_identity_violation"] <= 1e-8
                           and rep["max_alias_violation"] <= 1e-8)
            roundtrip_ok = rep["max_roundtrip_rel_error"] <= 1e-8
            assert analytic_ok == roundtrip_ok


class TestQOrthogonality:
    def test_ortho_on_bipartite_identity_q(self):
        g, p = random_bipartite_graph(40, seed=5)
        ctx = make_context(normalized_laplacian(g), p, mode="dense")
        np.testing.assert_allclose(ctx.q.toarray(), np.eye(40), atol=1e-12)
        rep = check_q_orthogonality(orthogonal_cosine_spec(), ctx)
        assert rep["passed"]

    def test_ortho_on_arbitrary_graph(self):
        ctx = comb_context(60, 12, mode="dense")
        rep = check_q_orthogonality(orthogonal_cosine_spec(), ctx)
        assert rep["passed"]

    def test_lazy_fails_within_frame_bounds(self):
        ctx = comb_context(60, 13, mode="dense")
        rep = check_q_orthogonality(lazy_spec(), ctx)
        assert not rep["passed"]
        alpha, beta = frame_bounds(lazy_spec())
        # norm ratios stay inside the frame-bound interval
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.standard_normal(60)
            c = analyze(lazy_spec(), ctx, x)
            from mqfb.filterbank import coeff_q_inner, q_inner

            ratio = np.sqrt(coeff_q_inner(ctx, c, c) / q_inner(ctx.q, x, x))
            assert alpha - 1e-6 <= ratio <= beta + 1e-6

    def test_orthogonal_implies_pr(self):
        spec = orthogonal_cosine_spec()
        for seed in range(5):
            ctx = comb_context(50, seed + 300, mode="dense")
            if check_q_orthogonality(spec, ctx)["passed"]:
                assert check_pr(spec, ctx, trials=3)["passed"]


class TestFrameBounds:
    def test_orthogonal_cosine_tight(self):
        alpha, beta = frame_bounds(orthogonal_cosine_spec())
        assert alpha == pytest.approx(1.0, abs=1e-9)
        assert beta == pytest.approx(1.0, abs=1e-9)

    def test_lazy_closed_form(self):
        alpha, beta = frame_bounds(lazy_spec())
        assert alpha**2 == pytest.approx(0.5, abs=1e-6)
        assert beta**2 == pytest.approx(2.5, abs=1e-6)

    def test_constant_kernels(self):
        spec = FilterBankSpec(
            h0=Kernel(coeffs=(1.0,)), h1=Kernel(coeffs=(1.0,)),
            g0=Kernel(coeffs=(1.0,)), g1=Kernel(coeffs=(1.0,)),
        )
        alpha, beta = frame_bounds(spec)
        assert alpha == pytest.approx(1.0)
        assert beta == pytest.approx(1.0)


class TestZeroDc:
    def test_constant_input_zero_detail_bipartite(self):
        # bipartite, M = L gives Q = D and Z = random-walk Laplacian, so the
        # plain lazy bank already kills constants in the high-pass channel
        g, p = random_bipartite_graph(40, seed=6)
        lap = combinatorial_laplacian(g)
        ctx = make_context(lap, p, mode="poly", degrees=degrees(g))
        c = analyze(lazy_spec(), ctx, np.ones(40))
        assert np.max(np.abs(c.d)) <= 1e-10

    def test_wrapped_normalized_bank_zero_detail(self):
        g, p = random_bipartite_graph(40, seed=16)
        ctx = make_context(normalized_laplacian(g), p, mode="poly",
                           degrees=degrees(g))
        c = analyze(zero_dc_wrap(lazy_spec()), ctx, np.ones(40))
        assert np.max(np.abs(c.d)) <= 1e-10

    def test_wrapped_roundtrip(self):
        ctx = comb_context(80, 14, mode="poly")
        spec = zero_dc_wrap(lazy_spec())
        x = np.random.default_rng(5).standard_normal(80)
        xr = synthesize(spec, ctx, analyze(spec, ctx, x))
        assert np.linalg.norm(xr - x) <= 1e-8 * np.linalg.norm(x)

    def test_bipartite_fundamental_is_random_walk(self):
        g, p = random_bipartite_graph(30, seed=7)
        lap = combinatorial_laplacian(g)
        ctx = make_context(lap, p, mode="poly")
        x = np.random.default_rng(6).standard_normal(30)
        from mqfb.filterbank import apply_kernel

        zx = apply_kernel(ctx, Kernel(coeffs=(0.0, 1.0)), x)
        np.testing.assert_allclose(zx, (lap @ x) / degrees(g), atol=1e-10)

    def test_wrapped_normalized_operator_is_random_walk(self):
        # D^{-1/2} (normalized Laplacian) D^{1/2} == D^{-1} L
        g, p = random_bipartite_graph(30, seed=17)
        d = degrees(g)
        ctx = make_context(normalized_laplacian(g), p, mode="poly")
        lap = combinatorial_laplacian(g)
        x = np.random.default_rng(7).standard_normal(30)
        from mqfb.filterbank import apply_kernel

        wrapped = apply_kernel(ctx, Kernel(coeffs=(0.0, 1.0)),
                               np.sqrt(d) * x) / np.sqrt(d)
        np.testing.assert_allclose(wrapped, (lap @ x) / d, atol=1e-10)

    def test_missing_degrees_raises(self):
        g = random_connected_graph(20, seed=8)
        p = random_partition(20, 8)
        ctx = make_context(combinatorial_laplacian(g), p, mode="poly")
        with pytest.raises(ValueError):
            analyze(zero_dc_wrap(lazy_spec()), ctx, np.ones(20))


class TestSpecSerialization:
    def test_named_families_roundtrip(self):
        for spec in (lazy_spec(), orthogonal_cosine_spec()):
            back = FilterBankSpec.from_json(spec.to_json())
            assert back.family == spec.family
            assert back.mode == spec.mode

    def test_custom_polynomial_roundtrip(self):
        spec = FilterBankSpec(
            h0=Kernel(coeffs=(1.0, 0.5)), h1=Kernel(coeffs=(0.0, 1.0)),
            g0=Kernel(coeffs=(2.0, -1.0)), g1=Kernel(coeffs=(1.0,)),
        )
        back = FilterBankSpec.from_json(spec.to_json())
        lam = np.linspace(0, 2, 11)
        for k in ("h0", "h1", "g0", "g1"):
            np.testing.assert_allclose(
                back.kernels()[k](lam), spec.kernels()[k](lam)
            )

    def test_poly_mode_requires_polynomials(self):
        with pytest.raises(NotPolynomial):
            FilterBankSpec(
                h0=Kernel(name="cos_quarter"), h1=Kernel(name="sin_quarter"),
                g0=Kernel(name="cos_quarter"), g1=Kernel(name="sin_quarter"),
                mode="poly",
            )
