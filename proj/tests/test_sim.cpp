#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "turbodpsk/sim.hpp"

using namespace turbodpsk;

namespace {

std::vector<BerRecord> sample_records() {
    std::vector<BerRecord> out;
    const double bers[3][3] = {{1e-1, 1e-2, 1e-3}, {5e-2, 2e-3, 0.0}, {4e-2, 1e-3, 0.0}};
    const int iters[3] = {3, 1, 2};  // deliberately unsorted
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 3; ++i) {
            BerRecord r;
            r.mode = DetectionMode::coherent;
            r.code = OuterCodeKind::conv;
            r.fdts = 0.03;
            r.ebn0_db = 4.0 + 2.0 * i;
            r.iteration = iters[c];
            r.frames = 1000;
            r.ber = bers[c][i];
            r.bit_errors = static_cast<long>(std::lround(r.ber * 1000 * 1016));
            r.frame_errors = r.bit_errors > 0 ? 10 : 0;
            r.seconds = 1.5;
            out.push_back(r);
        }
    return out;
}

ExperimentConfig small_sweep(int workers) {
    auto cfg = validate_config("mode=coherent\ncode=conv\nebn0=7:1:9\niterations=1,2\nmax_frames=64\nmin_errors=50\n");
    cfg.workers = workers;
    cfg.seed = 42;
    return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(Config, EmptyGivesDefaults) {
    const auto c = validate_config("");
    EXPECT_EQ(c.mode, DetectionMode::coherent);
    EXPECT_EQ(c.code, OuterCodeKind::ldpc);
    EXPECT_DOUBLE_EQ(c.fdts, 0.03);
    EXPECT_DOUBLE_EQ(c.sigma1_sq, 0.5);
    EXPECT_DOUBLE_EQ(c.sigma2_sq, 0.5);
    EXPECT_EQ(c.min_errors, 100);
    EXPECT_EQ(c.ldpc_iterations, 20);
    EXPECT_EQ(c.demod_output, DemodOutput::app);
    EXPECT_FALSE(c.fade_correlation.has_value());
}

TEST(Config, SweepArithmetic) {
    EXPECT_EQ(validate_config("ebn0 = 0:2:10").ebn0_points(), (std::vector<double>{0, 2, 4, 6, 8, 10}));
    const auto c = validate_config("ebn0_start=1\nebn0_stop=2\nebn0_step=0.25");
    EXPECT_EQ(c.ebn0_points().size(), 5u);
    EXPECT_DOUBLE_EQ(c.ebn0_points().back(), 2.0);
}

TEST(Config, FullParse) {
    const auto c = validate_config(
        "# comment line\n"
        "mode = noncoherent\n"
        "code = conv   # trailing comment\n"
        "fdTs = 0.01\n"
        "iterations = 5, 1, 2, 2\n"
        "max_frames = 500\n"
        "min_errors = 20\n"
        "min_frame_errors = 3\n"
        "seed = 9\n"
        "workers = 2\n"
        "out_dir = /tmp/x\n"
        "demod_output = extrinsic\n"
        "early_exit = false\n"
        "fade_correlation = 1\n");
    EXPECT_EQ(c.mode, DetectionMode::noncoherent);
    EXPECT_EQ(c.code, OuterCodeKind::conv);
    EXPECT_DOUBLE_EQ(c.fdts, 0.01);
    EXPECT_EQ(c.iterations, (std::vector<int>{1, 2, 5}));
    EXPECT_EQ(c.max_iteration(), 5);
    EXPECT_EQ(c.max_frames, 500);
    EXPECT_EQ(c.min_frame_errors, 3);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.workers, 2);
    EXPECT_EQ(c.out_dir, "/tmp/x");
    EXPECT_EQ(c.demod_output, DemodOutput::extrinsic);
    EXPECT_FALSE(c.early_exit);
    EXPECT_EQ(c.fade_correlation, 1.0);
}

TEST(Config, ErrorsNameTheKey) {
    auto key_of = [](const std::string& text) {
        try {
            validate_config(text);
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("<accepted>");
    };
    EXPECT_EQ(key_of("fdTs=-1"), "fdTs");
    EXPECT_EQ(key_of("max_frames=0"), "max_frames");
    EXPECT_EQ(key_of("min_errors=0"), "min_errors");
    EXPECT_EQ(key_of("bogus=1"), "bogus");
    EXPECT_EQ(key_of("seed=1\nseed=2"), "seed");
    EXPECT_EQ(key_of("mode=psk"), "mode");
    EXPECT_EQ(key_of("ebn0=5:1:4"), "ebn0_stop");
    EXPECT_EQ(key_of("ebn0=0:0:4"), "ebn0_step");
    EXPECT_EQ(key_of("ebn0=1:2"), "ebn0");
    EXPECT_EQ(key_of("iterations=0"), "iterations");
    EXPECT_EQ(key_of("workers=0"), "workers");
    EXPECT_EQ(key_of("sigma1_sq=0"), "sigma1_sq");
    EXPECT_EQ(key_of("fade_correlation=2"), "fade_correlation");
    EXPECT_EQ(key_of("early_exit=maybe"), "early_exit");
    EXPECT_EQ(key_of("Es=abc"), "Es");
    EXPECT_EQ(key_of("just text"), "just text");
}

TEST(Config, ChannelParamsDerivation) {
    const auto c = validate_config("fdTs=0.03");
    const auto p = channel_params_for(c, 0.5, 3.0);
    EXPECT_NEAR(p.fade_correlation, jakes_lag1_correlation(0.03), 1e-15);
    EXPECT_DOUBLE_EQ(p.delta_sq, ebn0_to_noise_var(3.0, 0.5, 1.0, 0.5, 0.5));
    const auto q = channel_params_for(validate_config("fade_correlation=1"), 0.5, 3.0);
    EXPECT_DOUBLE_EQ(q.fade_correlation, 1.0);
}

TEST(Config, AssetDirOverride) {
    ::setenv("TURBODPSK_ASSET_DIR", "/some/where", 1);
    EXPECT_EQ(asset_dir(), "/some/where");
    ::unsetenv("TURBODPSK_ASSET_DIR");
    EXPECT_NE(asset_dir(), "/some/where");
    ExperimentConfig c;
    c.alist_path = "/nonexistent.alist";
    EXPECT_THROW(load_assets(c), std::runtime_error);
}

// ---------------------------------------------------------------------------

TEST(Csv, HeaderIsExact) {
    std::ostringstream os;
    write_csv(os, {});
    EXPECT_EQ(os.str(), "mode,code,fdTs,ebn0_db,iteration,frames,bit_errors,ber,frame_errors,seconds\n");
}

TEST(Csv, RoundTrip) {
    const auto recs = sample_records();
    std::stringstream ss;
    write_csv(ss, recs);
    const auto back = read_csv(ss);
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(csv_line(back[i]), csv_line(recs[i]));
        EXPECT_EQ(back[i].bit_errors, recs[i].bit_errors);
    }
    std::stringstream bad("mode,code\n");
    EXPECT_THROW(read_csv(bad), std::runtime_error);
}

TEST(Csv, LineFormat) {
    BerRecord r;
    r.mode = DetectionMode::noncoherent;
    r.code = OuterCodeKind::ldpc;
    r.fdts = 0.03;
    r.ebn0_db = 12.5;
    r.iteration = 2;
    r.frames = 320;
    r.bit_errors = 123;
    r.ber = 123.0 / (320.0 * 1008.0);
    r.frame_errors = 7;
    r.seconds = 2.25;
    EXPECT_EQ(csv_line(r), "noncoherent,ldpc,0.03,12.5000,2,320,123,3.813244e-04,7,2.250");
}

// ---------------------------------------------------------------------------

TEST(RequiredEbn0, InterpolatesInLogDomain) {
    std::vector<BerRecord> recs(2);
    recs[0].ebn0_db = 10;
    recs[0].ber = 1e-3;
    recs[0].frames = 100;
    recs[1].ebn0_db = 12;
    recs[1].ber = 1e-5;
    recs[1].frames = 100;
    EXPECT_NEAR(*required_ebn0(recs, 1, 1e-4, 1000), 11.0, 1e-12);
    EXPECT_FALSE(required_ebn0(recs, 1, 1e-6, 1000).has_value());
    EXPECT_FALSE(required_ebn0(recs, 1, 1e-2, 1000).has_value());
    EXPECT_FALSE(required_ebn0(recs, 2, 1e-4, 1000).has_value());
}

TEST(RequiredEbn0, ZeroErrorPointIsUpperBound) {
    std::vector<BerRecord> recs(2);
    recs[0].ebn0_db = 10;
    recs[0].ber = 1e-3;
    recs[0].frames = 100;
    recs[1].ebn0_db = 11;
    recs[1].ber = 0.0;
    recs[1].frames = 50;  // 0.5 / (50 * 1000) = 1e-5
    EXPECT_NEAR(*required_ebn0(recs, 1, 1e-4, 1000), 10.5, 1e-12);
}

// ---------------------------------------------------------------------------

TEST(Plot, GoldenFile) {
    const std::string svg = emit_plot_svg(sample_records(), "coherent / conv");
    const std::string path = std::string(TURBODPSK_TEST_DATA) + "/plot_golden.svg";
    if (std::getenv("TURBODPSK_UPDATE_GOLDEN")) {
        std::ofstream(path) << svg;
    }
    std::ifstream f(path);
    ASSERT_TRUE(f) << "missing " << path;
    std::stringstream golden;
    golden << f.rdbuf();
    EXPECT_EQ(svg, golden.str());
}

TEST(Plot, CensoredPointsAndLegendOrder) {
    const std::string svg = emit_plot_svg(sample_records());
    std::size_t censored = 0;
    for (auto pos = svg.find("class=\"censored\""); pos != std::string::npos; pos = svg.find("class=\"censored\"", pos + 1))
        ++censored;
    EXPECT_EQ(censored, 2u);
    const auto i1 = svg.find(">iter 1<"), i2 = svg.find(">iter 2<"), i3 = svg.find(">iter 3<");
    ASSERT_NE(i1, std::string::npos);
    EXPECT_LT(i1, i2);
    EXPECT_LT(i2, i3);
}

TEST(Plot, SingleRecordAndEmpty) {
    std::vector<BerRecord> one(1);
    one[0].ber = 1e-3;
    const std::string svg = emit_plot_svg(one);
    EXPECT_NE(svg.find("<circle"), std::string::npos);
    EXPECT_EQ(svg.find("<circle", svg.find("<circle") + 1), std::string::npos);
    EXPECT_THROW(emit_plot_svg({}), std::invalid_argument);
}

// ---------------------------------------------------------------------------

TEST(Sweep, WorkerCountDoesNotChangeCounts) {
    const auto cfg1 = small_sweep(1);
    const auto assets = load_assets(cfg1);
    const auto a = run_sweep(cfg1, assets);
    const auto b = run_sweep(small_sweep(8), assets);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].frames, b[i].frames);
        EXPECT_EQ(a[i].bit_errors, b[i].bit_errors);
        EXPECT_EQ(a[i].frame_errors, b[i].frame_errors);
        EXPECT_EQ(a[i].ber, b[i].ber);
    }
}

TEST(Sweep, AccountingAndStopping) {
    const auto cfg = small_sweep(2);
    const auto assets = load_assets(cfg);
    const auto recs = run_sweep(cfg, assets);
    ASSERT_EQ(recs.size(), 6u);
    for (const auto& r : recs) {
        EXPECT_DOUBLE_EQ(r.ber, static_cast<double>(r.bit_errors) / (static_cast<double>(r.frames) * 1016.0));
        EXPECT_LE(r.frames, 64);
        EXPECT_EQ(r.frames % kFrameBatch, 0);
        EXPECT_LE(r.frame_errors, r.frames);
        EXPECT_GE(r.bit_errors, r.frame_errors);
    }
    // one record per tracked iteration at each point, sharing the frame count
    EXPECT_EQ(recs[0].frames, recs[1].frames);
    EXPECT_EQ(recs[0].iteration, 1);
    EXPECT_EQ(recs[1].iteration, 2);
}

TEST(Sweep, HighSnrCoherentIsClean) {
    auto cfg = validate_config("mode=coherent\ncode=ldpc\nebn0=30:1:30\niterations=1\nmax_frames=32\n");
    const auto recs = run_sweep(cfg, load_assets(cfg));
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].bit_errors, 0);
    EXPECT_EQ(recs[0].frames, 32);
}

TEST(Sweep, StopBerEndsSweep) {
    auto cfg = validate_config("mode=coherent\ncode=ldpc\nebn0=30:1:35\niterations=1\nmax_frames=32\nstop_ber=1e-3\n");
    EXPECT_EQ(run_sweep(cfg, load_assets(cfg)).size(), 1u);
}

TEST(Sweep, SameSeedSameResult) {
    const auto cfg = small_sweep(1);
    const auto assets = load_assets(cfg);
    const auto a = run_sweep(cfg, assets);
    auto other = cfg;
    other.seed = 43;
    const auto b = run_sweep(cfg, assets);
    const auto c = run_sweep(other, assets);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].bit_errors, b[i].bit_errors);
        any_diff |= a[i].bit_errors != c[i].bit_errors;
    }
    EXPECT_TRUE(any_diff);
}
