#include <gtest/gtest.h>

#include <cmath>

#include "qwalk/analysis.hpp"
#include "qwalk/initcond.hpp"
#include "test_support.hpp"

using namespace qwalk;

namespace {

InitialConditionSpec make_spec(EnvelopeFamily family, double sigma0 = 0.0, CoinChoice coin = CoinSpinor{}) {
    InitialConditionSpec s;
    s.envelope.family = family;
    s.envelope.sigma0 = sigma0;
    s.coin = coin;
    return s;
}

}  // namespace

TEST(Build, DeltaIsLocalizedWithUnitNorm) {
    const CoinParameter coin(pi / 4);
    auto spec = make_spec(EnvelopeFamily::delta, 0.0, CoinSpinor{{1, 0}, {0, 1}});
    const auto st = build(spec, coin);
    EXPECT_EQ(st.support(), (std::pair<std::int64_t, std::int64_t>{0, 0}));
    EXPECT_NEAR(st.norm2(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(st.R_at(0) - cplx(1 / std::sqrt(2.0), 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(st.L_at(0) - cplx(0, 1 / std::sqrt(2.0))), 0.0, 1e-15);

    spec.envelope.x0 = 7;
    EXPECT_EQ(build(spec, coin).support().first, 7);
}

TEST(Build, SincSamplesOnLattice) {
    const CoinParameter coin(pi / 4);
    const auto env = envelope_samples(make_spec(EnvelopeFamily::sinc, 15.0).envelope);
    const auto at = [&](std::int64_t x) { return env.f[static_cast<std::size_t>(x - env.x_min)]; };
    EXPECT_EQ(at(0), cplx(1.0, 0.0));
    EXPECT_EQ(at(15), cplx(0.0, 0.0));
    EXPECT_EQ(at(-15), cplx(0.0, 0.0));
    EXPECT_NEAR(at(7).real(), std::sin(pi * 7 / 15.0) / (pi * 7 / 15.0), 1e-15);
    EXPECT_EQ(env.cutoff, 6000.0);
    EXPECT_EQ(env.x_min, -5999);  // +-6000 are zeros of the sinc and are trimmed
    const auto st = build(make_spec(EnvelopeFamily::sinc, 15.0), coin);
    EXPECT_NEAR(st.norm2(), 1.0, 1e-12);
}

TEST(Build, GaussianWithCarrierAndEigenspinorCoin) {
    const CoinParameter coin(pi / 4);
    auto spec = make_spec(EnvelopeFamily::gaussian, 10.0, EigenspinorSelector{pi / 2, Branch::plus});
    spec.carrier_k0 = pi / 2;
    const auto st = build(spec, coin);
    EXPECT_NEAR(st.norm2(), 1.0, 1e-12);
    const auto [lo, hi] = st.support();
    EXPECT_EQ(lo, -hi);
    EXPECT_NEAR(static_cast<double>(hi), 10.0 * std::sqrt(2 * std::log(1e12)), 1.0);
    // Ratio of neighbouring R amplitudes carries e^{i k0} times the Gaussian ratio.
    const cplx ratio = st.R_at(1) / st.R_at(0);
    EXPECT_NEAR(std::abs(ratio - std::polar(std::exp(-0.5 / 100.0), pi / 2)), 0.0, 1e-14);
    // Site-uniform coin: every site is proportional to the eigenspinor.
    const auto e = eigenspinor(pi / 2, coin, Branch::plus);
    for (std::int64_t x = lo; x <= hi; ++x) {
        EXPECT_NEAR(std::abs(st.R_at(x) * e.components[1] - st.L_at(x) * e.components[0]), 0.0, 1e-15);
    }
}

TEST(Build, QuadraticPhaseKeepsModulus) {
    const CoinParameter coin(pi / 4);
    auto spec = make_spec(EnvelopeFamily::gaussian, 6.0);
    const auto plain = build(spec, coin);
    spec.envelope.quad_phase = 0.01;
    const auto chirped = build(spec, coin);
    EXPECT_EQ(plain.support(), chirped.support());
    for (std::int64_t x = -20; x <= 20; ++x) {
        EXPECT_NEAR(std::abs(chirped.R_at(x)), std::abs(plain.R_at(x)), 1e-15);
        EXPECT_NEAR(std::arg(chirped.R_at(x) / plain.R_at(x)), std::remainder(0.01 * x * x, 2 * pi), 1e-12);
    }
}

TEST(Build, ExplicitCutoffTruncates) {
    auto spec = make_spec(EnvelopeFamily::sinc, 15.0);
    spec.envelope.cutoff = 100.5;
    const auto env = envelope_samples(spec.envelope);
    EXPECT_EQ(env.cutoff, 100.0);
    EXPECT_EQ(env.x_min, -100);
    EXPECT_EQ(env.f.size(), 201u);
}

TEST(Build, InvalidSpecs) {
    const CoinParameter coin(pi / 4);
    EXPECT_THROW(build(make_spec(EnvelopeFamily::gaussian, 0.0), coin), InvalidSpecError);
    EXPECT_THROW(build(make_spec(EnvelopeFamily::sinc, -2.0), coin), InvalidSpecError);
    EXPECT_THROW(build(make_spec(EnvelopeFamily::sinc_gaussian, 15.0), coin), InvalidSpecError);
    auto per = make_spec(EnvelopeFamily::periodic, 2.0);
    per.envelope.lambda = 10.5;
    EXPECT_THROW(build(per, coin), InvalidSpecError);
    auto delta = make_spec(EnvelopeFamily::delta);
    delta.envelope.x0 = 0.5;
    EXPECT_THROW(build(delta, coin), InvalidSpecError);
    auto zero_coin = make_spec(EnvelopeFamily::delta, 0.0, CoinSpinor{{0, 0}, {0, 0}});
    EXPECT_THROW(build(zero_coin, coin), InvalidSpecError);
    auto far = make_spec(EnvelopeFamily::gaussian, 5.0);
    far.carrier_k0 = 4.0;
    EXPECT_THROW(build(far, coin), InvalidSpecError);
    EXPECT_THROW(envelope_family_from_string("box"), InvalidSpecError);
    EXPECT_EQ(envelope_family_from_string(to_string(EnvelopeFamily::sinc_gaussian)), EnvelopeFamily::sinc_gaussian);
}

TEST(BranchWeights, Examples) {
    const CoinParameter coin(pi / 4);
    const auto eig = resolve_coin(EigenspinorSelector{pi / 2, Branch::plus}, coin);
    auto w = branch_weights(eig, pi / 2, coin);
    EXPECT_NEAR(w.plus, 1.0, 1e-12);
    EXPECT_NEAR(w.minus, 0.0, 1e-12);

    w = branch_weights(CoinSpinor{{1, 0}, {0, 0}}, pi / 2, coin);
    EXPECT_NEAR(w.plus, 0.5, 1e-12);
    EXPECT_NEAR(w.minus, 0.5, 1e-12);

    w = branch_weights(CoinSpinor{{1, 0}, {0, 0}}, 0.0, coin);
    EXPECT_NEAR(w.plus, 0.8536, 1e-4);
    EXPECT_NEAR(w.minus, 0.1464, 1e-4);
}

TEST(BranchWeights, SumToOne) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> uk(-pi, pi), ut(0.05, 1.5);
    for (int i = 0; i < 200; ++i) {
        const CoinSpinor c{{g(rng), g(rng)}, {g(rng), g(rng)}};
        const auto w = branch_weights(c, uk(rng), CoinParameter(ut(rng)));
        EXPECT_NEAR(w.plus + w.minus, 1.0, 1e-12);
    }
}

TEST(BranchWeights, FromStateRequiresSiteUniformCoin) {
    const CoinParameter coin(pi / 4);
    const auto st = qwalk::testing::gaussian_state(8.0, 0.0, CoinSpinor{{1, 0}, {0, 0}}, coin);
    const auto w = branch_weights(st, 0.0, coin);
    EXPECT_NEAR(w.plus, 0.8536, 1e-4);

    std::mt19937_64 rng(3);
    const auto mixed = qwalk::testing::random_state(rng, 8);
    EXPECT_THROW(branch_weights(mixed, 0.0, coin), InvalidSpecError);
}

TEST(SincGaussian, ApproachesSincForWideApodization) {
    auto sinc_spec = make_spec(EnvelopeFamily::sinc, 15.0).envelope;
    sinc_spec.cutoff = 600.0;
    auto sg = sinc_spec;
    sg.family = EnvelopeFamily::sinc_gaussian;
    double prev = 1e300;
    for (double factor : {2.0, 20.0, 200.0, 2000.0}) {
        sg.sigmaG = factor * 15.0;
        double d = 0.0;
        for (double x = -600; x <= 600; x += 1.0) {
            d = std::max(d, std::abs(envelope_value(sg, x) - envelope_value(sinc_spec, x)));
        }
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(SincGaussian, CutoffFollowsTheApodizingGaussian) {
    EnvelopeSpec e;
    e.family = EnvelopeFamily::sinc_gaussian;
    e.sigma0 = 15.0;
    e.sigmaG = preset_sigmaG_factors[1] * 15.0;
    EXPECT_EQ(resolved_cutoff(e), std::floor(30.0 * std::sqrt(2 * std::log(1e12))));
}

TEST(Periodic, GratingHasPeriodLambda) {
    EnvelopeSpec e;
    e.family = EnvelopeFamily::periodic;
    e.sigma0 = 3.0;
    e.lambda = 20.0;
    for (double x = -50; x < 50; x += 0.7) EXPECT_NEAR(envelope_value(e, x), envelope_value(e, x + 20.0), 1e-12);
    EXPECT_GT(envelope_value(e, 0.0), envelope_value(e, 10.0));
    EXPECT_EQ(resolved_cutoff(e), 80.0);
}

TEST(BranchSplit, PacketsMoveAtPlusMinusCosTheta) {
    // A col(1, 0) coin at k0 = 0 populates both branches; they separate at v = -+cos(theta).
    for (double theta : {pi / 4, 1.0}) {
        const CoinParameter coin(theta);
        const double sigma0 = 10.0;
        auto st = qwalk::testing::gaussian_state(sigma0, 0.0, CoinSpinor{{1, 0}, {0, 0}}, coin);
        std::vector<ProbabilityDistribution> series;
        const auto t_end = static_cast<std::int64_t>(20 * sigma0);
        for (std::int64_t t = 0; t < t_end; t += 50) {
            st = evolve(st, coin, t == 0 ? 100 : 50);
            series.push_back(probability(st));
        }
        const auto track = track_packets(series);
        ASSERT_EQ(track.packets.size(), 2u);
        const double w = branch_weights(CoinSpinor{{1, 0}, {0, 0}}, 0.0, coin).plus;
        EXPECT_NEAR(track.packets[0].velocity, -std::cos(theta), 0.02) << theta;
        EXPECT_NEAR(track.packets[1].velocity, std::cos(theta), 0.02) << theta;
        EXPECT_NEAR(track.packets[0].mean_mass, w, 0.01) << theta;
        EXPECT_NEAR(track.packets[1].mean_mass, 1.0 - w, 0.01) << theta;
    }
}

TEST(SincCutoff, SensitivityIsBounded) {
    // Doubling the sinc cutoff must not change the early-time distribution much.
    const CoinParameter coin(pi / 4);
    auto spec = make_spec(EnvelopeFamily::sinc, 15.0, EigenspinorSelector{pi / 2, Branch::plus});
    spec.carrier_k0 = pi / 2;
    spec.envelope.cutoff = 1500.0;
    const auto a = probability(evolve(build(spec, coin), coin, 500));
    spec.envelope.cutoff = 3000.0;
    const auto b = probability(evolve(build(spec, coin), coin, 500));
    const double d = distance(a, b, Metric::L1);
    EXPECT_LT(d, 0.01);
    EXPECT_GT(d, 0.0);
}
