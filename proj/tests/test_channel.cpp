#include <gtest/gtest.h>

#include <cmath>

#include "turbodpsk/channel.hpp"
#include "turbodpsk/signal_model.hpp"

using namespace turbodpsk;

namespace {

struct FadingMoments {
    double power = 0.0;      // mean |h|^2
    double lag1 = 0.0;       // mean Re h(k) h*(k-1)
    double diff = 0.0;       // mean |h(k) - h(k-1)|^2
    double re_mean = 0.0;
    double re_var = 0.0;
    double re_kurtosis = 0.0;
};

// 1000 independent sequences of 1000 samples each.
FadingMoments moments(double fdts, std::uint64_t seed) {
    Rng rng(seed);
    double p = 0, l1 = 0, d = 0, m1 = 0, m2 = 0, m4 = 0;
    long n = 0, nl = 0;
    for (int s = 0; s < 1000; ++s) {
        const auto h = jakes_fading(1000, 1.0, fdts, rng);
        for (std::size_t k = 0; k < h.size(); ++k) {
            p += std::norm(h[k]);
            m1 += h[k].real();
            m2 += h[k].real() * h[k].real();
            m4 += std::pow(h[k].real(), 4);
            ++n;
            if (k > 0) {
                l1 += (h[k] * std::conj(h[k - 1])).real();
                d += std::norm(h[k] - h[k - 1]);
                ++nl;
            }
        }
    }
    FadingMoments out;
    out.power = p / static_cast<double>(n);
    out.lag1 = l1 / static_cast<double>(nl);
    out.diff = d / static_cast<double>(nl);
    out.re_mean = m1 / static_cast<double>(n);
    out.re_var = m2 / static_cast<double>(n) - out.re_mean * out.re_mean;
    out.re_kurtosis = (m4 / static_cast<double>(n)) / (out.re_var * out.re_var);
    return out;
}

}  // namespace

TEST(Jakes, ZeroDopplerIsConstant) {
    const auto h = jakes_fading(500, 1.0, 0.0, std::uint64_t{3});
    for (const auto& v : h) EXPECT_EQ(v, h.front());
}

TEST(Jakes, SameSeedSameRealisation) {
    EXPECT_EQ(jakes_fading(1009, 1.0, 0.03, std::uint64_t{11}), jakes_fading(1009, 1.0, 0.03, std::uint64_t{11}));
    EXPECT_NE(jakes_fading(1009, 1.0, 0.03, std::uint64_t{11}), jakes_fading(1009, 1.0, 0.03, std::uint64_t{12}));
}

TEST(Jakes, RejectsBadArguments) {
    EXPECT_THROW(jakes_fading(0, 1.0, 0.03, std::uint64_t{1}), std::invalid_argument);
    EXPECT_THROW(jakes_fading(10, 0.0, 0.03, std::uint64_t{1}), std::invalid_argument);
    EXPECT_THROW(jakes_fading(10, 1.0, -0.1, std::uint64_t{1}), std::invalid_argument);
}

TEST(Jakes, MomentsAndCorrelation) {
    const auto m = moments(0.03, 2024);
    EXPECT_NEAR(m.power, 1.0, 0.01);
    const double rho = std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * 0.03);
    EXPECT_NEAR(rho, 0.9911, 1e-4);
    EXPECT_NEAR(m.lag1 / m.power, rho, 0.01 * rho);
    // Gaussian marginals: zero mean, half the power per dimension, kurtosis 3
    EXPECT_NEAR(m.re_mean, 0.0, 0.01);
    EXPECT_NEAR(m.re_var, 0.5, 0.01);
    EXPECT_NEAR(m.re_kurtosis, 3.0, 0.1);
    // slow-fading premise
    EXPECT_LT(m.diff / 1.0, 0.05);
}

TEST(Jakes, LagOneHelperMatchesBessel) {
    EXPECT_DOUBLE_EQ(jakes_lag1_correlation(0.0), 1.0);
    EXPECT_NEAR(jakes_lag1_correlation(0.03), 0.9911371, 1e-7);
}

TEST(Mac, NoiselessSum) {
    SymbolSeq x;
    x.symbols = CplxSeq(5, 1.0);
    ChannelRealization ch{CplxSeq(5, 1.0), CplxSeq(5, 1.0), CplxSeq(5, 0.0)};
    for (const auto& r : mac_transmit(x, x, ch)) EXPECT_EQ(r, cplx(2.0, 0.0));
}

TEST(Mac, SilentSourcesGiveNoise) {
    SymbolSeq x;
    x.symbols = CplxSeq(4, 0.0);
    Rng rng(5);
    ChannelParams p;
    const auto ch = draw_realization(4, p, rng);
    EXPECT_EQ(mac_transmit(x, x, ch), ch.noise);
}

TEST(Mac, SuperpositionOfSingleUserLinks) {
    Rng rng(9);
    ChannelParams p;
    std::vector<std::uint8_t> b1(30), b2(30);
    for (auto& v : b1) v = static_cast<std::uint8_t>(rng() & 1);
    for (auto& v : b2) v = static_cast<std::uint8_t>(rng() & 1);
    const auto x1 = differential_encode(BitSeq(b1));
    const auto x2 = differential_encode(BitSeq(b2));
    const auto ch = draw_realization(x1.size(), p, rng);
    const auto r = mac_transmit(x1, x2, ch);
    for (std::size_t k = 0; k < r.size(); ++k)
        EXPECT_NEAR(std::abs(r[k] - (ch.h1[k] * x1[k] + ch.h2[k] * x2[k] + ch.noise[k])), 0.0, 1e-15);
    SymbolSeq short_x;
    short_x.symbols = CplxSeq(3, 1.0);
    EXPECT_THROW(mac_transmit(short_x, x2, ch), std::invalid_argument);
}

TEST(Mac, IndependentLinks) {
    Rng rng(21);
    ChannelParams p;
    p.fdts = 0.2;
    cplx cross{0.0, 0.0};
    double n1 = 0, n2 = 0;
    for (int t = 0; t < 400; ++t) {
        const auto ch = draw_realization(500, p, rng);
        for (std::size_t k = 0; k < ch.size(); ++k) {
            cross += ch.h1[k] * std::conj(ch.h2[k]);
            n1 += std::norm(ch.h1[k]);
            n2 += std::norm(ch.h2[k]);
        }
    }
    EXPECT_LT(std::abs(cross) / std::sqrt(n1 * n2), 0.02);
}

TEST(NoiseVariance, Examples) {
    EXPECT_DOUBLE_EQ(ebn0_to_noise_var(0.0, 1.0, 1.0, 0.5, 0.5), 0.5);
    EXPECT_NEAR(ebn0_to_noise_var(3.0103, 1.0, 1.0, 0.5, 0.5), 0.25, 1e-5);
    EXPECT_LT(ebn0_to_noise_var(200.0, 0.5, 1.0, 0.5, 0.5), 1e-19);
    EXPECT_DOUBLE_EQ(ebn0_to_noise_var(0.0, 0.5, 1.0, 0.5, 0.5), 1.0);
    EXPECT_THROW(ebn0_to_noise_var(0.0, 0.0, 1.0, 0.5, 0.5), std::invalid_argument);
}

TEST(ChannelParamsCheck, Validation) {
    ChannelParams p;
    EXPECT_NO_THROW(p.validate());
    p.delta_sq = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = ChannelParams{};
    p.fdts = -1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = ChannelParams{};
    p.fade_correlation = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
