#include <gtest/gtest.h>

#include <cmath>

#include "turbodpsk/sim.hpp"

using namespace turbodpsk;

namespace {

struct RelayFrame {
    BitSeq cr;
    CplxSeq r;
    ChannelRealization ch;
};

const CodeAssets& assets_for(OuterCodeKind kind) {
    static const CodeAssets ldpc = [] {
        ExperimentConfig c;
        c.code = OuterCodeKind::ldpc;
        return load_assets(c);
    }();
    static const CodeAssets conv = [] {
        ExperimentConfig c;
        c.code = OuterCodeKind::conv;
        return load_assets(c);
    }();
    return kind == OuterCodeKind::ldpc ? ldpc : conv;
}

RelayFrame make_frame(const CodeAssets& a, const ChannelParams& p, Rng& rng, bool noiseless = false) {
    const auto k = static_cast<std::size_t>(a.codec->info_length());
    auto bits = [&] {
        std::vector<std::uint8_t> b(k);
        for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1);
        return BitSeq(b, BitRole::info);
    };
    const auto c1 = a.codec->encode(bits()), c2 = a.codec->encode(bits());
    RelayFrame f;
    f.cr = xor_reference(c1, c2);
    const auto x1 = differential_encode(BitSeq(a.interleaver->interleave(c1.bits)), kReferenceSymbol, p.es);
    const auto x2 = differential_encode(BitSeq(a.interleaver->interleave(c2.bits)), kReferenceSymbol, p.es);
    f.ch = draw_realization(x1.size(), p, rng);
    if (noiseless) std::fill(f.ch.noise.begin(), f.ch.noise.end(), cplx{});
    f.r = mac_transmit(x1, x2, f.ch);
    return f;
}

ChannelParams params_at(double ebn0_db, double rate) {
    ChannelParams p;
    p.delta_sq = ebn0_to_noise_var(ebn0_db, rate, p.es, p.sigma1_sq, p.sigma2_sq);
    p.fade_correlation = jakes_lag1_correlation(p.fdts);
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(SplitExtrinsic, Examples) {
    for (double v : split_extrinsic(0.0)) EXPECT_DOUBLE_EQ(v, 0.25);
    const auto s = split_extrinsic(std::log(3.0));
    EXPECT_NEAR(s[0], 0.125, 1e-15);
    EXPECT_NEAR(s[1], 0.375, 1e-15);
    EXPECT_NEAR(s[2], 0.375, 1e-15);
    EXPECT_NEAR(s[3], 0.125, 1e-15);
    const auto big = split_extrinsic(800.0);
    EXPECT_DOUBLE_EQ(big[1], 0.5);
    EXPECT_DOUBLE_EQ(big[2], 0.5);
    EXPECT_DOUBLE_EQ(big[0], 0.0);
    const auto neg = split_extrinsic(-800.0);
    EXPECT_DOUBLE_EQ(neg[0], 0.5);
    EXPECT_DOUBLE_EQ(neg[3], 0.5);
}

TEST(SplitExtrinsic, SymmetryAndScaling) {
    for (double le = -12.0; le <= 12.0; le += 0.37) {
        const auto s = split_extrinsic(le);
        EXPECT_EQ(s[0], s[3]);
        EXPECT_EQ(s[1], s[2]);
        EXPECT_NEAR(s[0] + s[1] + s[2] + s[3], 1.0, 1e-15);
        EXPECT_NEAR(std::log(s[1] / s[0]), le, 1e-9);
        const auto d = split_extrinsic(2.0 * le);
        EXPECT_NEAR(std::log(d[1] / d[0]), 2.0 * std::log(s[1] / s[0]), 1e-9);
        EXPECT_NEAR(prior_xor_llr(s), le, 1e-9);
    }
}

// ---------------------------------------------------------------------------

TEST(Relay, NoiselessCoherentIsErrorFree) {
    for (auto kind : {OuterCodeKind::ldpc, OuterCodeKind::conv}) {
        const auto& a = assets_for(kind);
        ChannelParams p;
        p.delta_sq = 1e-6;
        Rng rng(1);
        const auto f = make_frame(a, p, rng, true);
        TurboConfig cfg;
        const auto res = relay_receive(f.r, cfg, *a.codec, *a.interleaver, &f.ch, p, &f.cr);
        EXPECT_EQ(res.trace.front().xor_bit_errors, 0);
        EXPECT_EQ(res.decision, f.cr);
    }
}

TEST(Relay, FirstIterationEqualsOneShotBaseline) {
    for (auto kind : {OuterCodeKind::ldpc, OuterCodeKind::conv})
        for (auto mode : {DetectionMode::coherent, DetectionMode::noncoherent}) {
            const auto& a = assets_for(kind);
            const ChannelParams p = params_at(mode == DetectionMode::coherent ? 8.0 : 15.0, a.codec->rate());
            Rng rng(2);
            const auto f = make_frame(a, p, rng);
            const auto* csi = mode == DetectionMode::coherent ? &f.ch : nullptr;

            const auto dm = demodulate(f.r, mode, csi, uniform_prior(f.cr.size()), p);
            const auto dec = a.codec->decode(a.interleaver->deinterleave(dm.llr));

            TurboConfig cfg;
            cfg.mode = mode;
            cfg.num_iterations = 1;
            const auto res = relay_receive(f.r, cfg, *a.codec, *a.interleaver, csi, p, &f.cr);
            EXPECT_EQ(res.decision, dec.codeword);
            EXPECT_EQ(res.trace[0].xor_bit_errors, count_bit_errors(dec.codeword, f.cr));
            EXPECT_EQ(res.trace[0].decoder_converged, dec.converged);
        }
}

TEST(Relay, TraceLengthAndEarlyExitPadding) {
    const auto& a = assets_for(OuterCodeKind::ldpc);
    ChannelParams p;
    p.delta_sq = 1e-6;
    Rng rng(3);
    const auto f = make_frame(a, p, rng, true);
    TurboConfig cfg;
    cfg.num_iterations = 5;
    const auto res = relay_receive(f.r, cfg, *a.codec, *a.interleaver, &f.ch, p, &f.cr);
    ASSERT_EQ(res.trace.size(), 5u);
    EXPECT_FALSE(res.trace[0].early_exit_copy);
    EXPECT_FALSE(res.trace[1].early_exit_copy);
    for (std::size_t i = 2; i < 5; ++i) {
        EXPECT_TRUE(res.trace[i].early_exit_copy);
        EXPECT_EQ(res.trace[i].xor_bit_errors, 0);
    }
    cfg.early_exit = false;
    const auto full = relay_receive(f.r, cfg, *a.codec, *a.interleaver, &f.ch, p, &f.cr);
    ASSERT_EQ(full.trace.size(), 5u);
    for (const auto& st : full.trace) EXPECT_FALSE(st.early_exit_copy);
}

TEST(Relay, WithoutReferenceErrorsAreUnknown) {
    const auto& a = assets_for(OuterCodeKind::conv);
    const ChannelParams p = params_at(10.0, a.codec->rate());
    Rng rng(4);
    const auto f = make_frame(a, p, rng);
    const auto res = relay_receive(f.r, TurboConfig{}, *a.codec, *a.interleaver, std::optional<ChannelRealization>(f.ch), p);
    for (const auto& st : res.trace) EXPECT_EQ(st.xor_bit_errors, -1);
}

TEST(Relay, Deterministic) {
    for (auto mode : {DetectionMode::coherent, DetectionMode::noncoherent}) {
        const auto& a = assets_for(OuterCodeKind::ldpc);
        const ChannelParams p = params_at(mode == DetectionMode::coherent ? 9.0 : 16.0, a.codec->rate());
        TurboConfig cfg;
        cfg.mode = mode;
        cfg.num_iterations = 4;
        cfg.early_exit = false;
        auto run = [&] {
            Rng rng(5);
            const auto f = make_frame(a, p, rng);
            return relay_receive(f.r, cfg, *a.codec, *a.interleaver, &f.ch, p, &f.cr);
        };
        const auto x = run(), y = run();
        EXPECT_EQ(x.decision, y.decision);
        ASSERT_EQ(x.trace.size(), y.trace.size());
        for (std::size_t i = 0; i < x.trace.size(); ++i) {
            EXPECT_EQ(x.trace[i].xor_bit_errors, y.trace[i].xor_bit_errors);
            EXPECT_EQ(x.trace[i].mean_abs_extrinsic, y.trace[i].mean_abs_extrinsic);
        }
    }
}

TEST(Relay, ZeroExtrinsicReproducesFirstPass) {
    const auto& a = assets_for(OuterCodeKind::conv);
    const ChannelParams p = params_at(9.0, a.codec->rate());
    Rng rng(6);
    const auto f = make_frame(a, p, rng);
    const auto first = demodulate(f.r, DetectionMode::coherent, &f.ch, uniform_prior(f.cr.size()), p);
    const auto again = demodulate(f.r, DetectionMode::coherent, &f.ch, split_extrinsic(LlrSeq(f.cr.size(), 0.0)), p);
    EXPECT_EQ(first.llr, again.llr);
}

TEST(Relay, NoncoherentDemodExtrinsicIgnoresPrior) {
    // The two-symbol noncoherent metric depends on the label only through the
    // per-user phase differences, so with the equal split the demodulator adds
    // the prior XOR log-ratio to a fixed channel term.
    const auto& a = assets_for(OuterCodeKind::conv);
    const ChannelParams p = params_at(15.0, a.codec->rate());
    Rng rng(7);
    const auto f = make_frame(a, p, rng);
    const auto n = f.cr.size();
    const auto base = demodulate(f.r, DetectionMode::noncoherent, nullptr, uniform_prior(n), p);
    std::normal_distribution<double> g(0.0, 3.0);
    LlrSeq le(n);
    for (double& v : le) v = g(rng);
    const auto withp = demodulate(f.r, DetectionMode::noncoherent, nullptr, split_extrinsic(le), p);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(withp.llr[k]) < kLlrMax && std::abs(base.llr[k]) < kLlrMax) {
            EXPECT_NEAR(withp.llr[k] - le[k], base.llr[k], 1e-8);
        }
    }
}

TEST(Relay, SecondIterationRarelyWorse) {
    const auto& a = assets_for(OuterCodeKind::conv);
    const ChannelParams p = params_at(8.0, a.codec->rate());
    TurboConfig cfg;
    cfg.num_iterations = 2;
    int not_worse = 0;
    const int seeds = 40;
    for (int s = 0; s < seeds; ++s) {
        long e1 = 0, e2 = 0;
        for (int fr = 0; fr < 4; ++fr) {
            Rng rng = derive_rng(static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(fr), 77);
            const auto f = make_frame(a, p, rng);
            const auto res = relay_receive(f.r, cfg, *a.codec, *a.interleaver, &f.ch, p, &f.cr);
            e1 += res.trace[0].xor_bit_errors;
            e2 += res.trace[1].xor_bit_errors;
        }
        not_worse += e2 <= e1;
    }
    EXPECT_GE(not_worse, static_cast<int>(std::ceil(0.95 * seeds)));
}

TEST(Relay, ArgumentChecks) {
    const auto& a = assets_for(OuterCodeKind::ldpc);
    ChannelParams p;
    Rng rng(8);
    const auto f = make_frame(a, p, rng);
    TurboConfig cfg;
    cfg.num_iterations = 0;
    EXPECT_THROW(relay_receive(f.r, cfg, *a.codec, *a.interleaver, &f.ch, p), std::invalid_argument);
    cfg.num_iterations = 1;
    CplxSeq short_r(f.r.begin(), f.r.end() - 1);
    EXPECT_THROW(relay_receive(short_r, cfg, *a.codec, *a.interleaver, &f.ch, p), std::invalid_argument);
    const auto& b = assets_for(OuterCodeKind::conv);
    EXPECT_THROW(relay_receive(f.r, cfg, *a.codec, *b.interleaver, &f.ch, p), std::invalid_argument);
    cfg.mode = DetectionMode::coherent;
    EXPECT_THROW(relay_receive(f.r, cfg, *a.codec, *a.interleaver, nullptr, p), std::invalid_argument);
}

TEST(Relay, DefaultIterationCounts) {
    EXPECT_EQ(TurboConfig::default_iterations(DetectionMode::coherent), 3);
    EXPECT_EQ(TurboConfig::default_iterations(DetectionMode::noncoherent), 2);
}
