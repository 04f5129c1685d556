#pragma once

// Monte Carlo BER driver for the relay receiver: flat key=value configuration,
// Eb/N0 sweeps with per-frame seeding, CSV records and SVG plots.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "turbodpsk/channel.hpp"
#include "turbodpsk/signal_model.hpp"
#include "turbodpsk/turbo.hpp"

namespace turbodpsk {

class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::invalid_argument("config key '" + key + "': " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct ExperimentConfig {
    DetectionMode mode = DetectionMode::coherent;
    OuterCodeKind code = OuterCodeKind::ldpc;
    double fdts = 0.03;
    double sigma1_sq = 0.5;
    double sigma2_sq = 0.5;
    double es = 1.0;
    double ebn0_start = 0.0;
    double ebn0_stop = 10.0;
    double ebn0_step = 1.0;
    std::vector<int> iterations{1, 2, 3, 5};
    long max_frames = 100000;
    long min_errors = 100;
    /// Additional per-curve frame-error floor for the stopping rule (0 = off).
    long min_frame_errors = 0;
    /// Stop the sweep after a point where every curve is below this BER (0 = off).
    double stop_ber = 0.0;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = ".";
    std::string alist_path;        ///< empty: <asset dir>/ldpc_1008x504_36.alist
    std::string interleaver_path;  ///< empty: <asset dir>/interleaver_<N>.txt
    int ldpc_iterations = 20;
    DemodOutput demod_output = DemodOutput::app;
    bool early_exit = true;
    /// Fade correlation assumed by the noncoherent metric; empty means
    /// J0(2 pi fdTs), the lag-one correlation of the simulated channel.
    std::optional<double> fade_correlation;

    std::vector<double> ebn0_points() const {
        const long count = static_cast<long>(std::floor((ebn0_stop - ebn0_start) / ebn0_step + 1e-9)) + 1;
        std::vector<double> pts;
        for (long i = 0; i < count; ++i) pts.push_back(ebn0_start + static_cast<double>(i) * ebn0_step);
        return pts;
    }
    int max_iteration() const { return *std::max_element(iterations.begin(), iterations.end()); }
};

inline std::string to_string(DetectionMode m) { return m == DetectionMode::coherent ? "coherent" : "noncoherent"; }
inline std::string to_string(OuterCodeKind c) { return c == OuterCodeKind::ldpc ? "ldpc" : "conv"; }

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
}

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Parses flat `key = value` text ('#' starts a comment). Unknown keys and
/// out-of-range values throw ConfigError naming the key.
inline ExperimentConfig validate_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "line " + std::to_string(lineno) + " is not key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError(key, "given twice");

        if (key == "mode") {
            if (val == "coherent") cfg.mode = DetectionMode::coherent;
            else if (val == "noncoherent") cfg.mode = DetectionMode::noncoherent;
            else throw ConfigError(key, "must be coherent or noncoherent");
        } else if (key == "code") {
            if (val == "ldpc") cfg.code = OuterCodeKind::ldpc;
            else if (val == "conv") cfg.code = OuterCodeKind::conv;
            else throw ConfigError(key, "must be ldpc or conv");
        } else if (key == "fdTs") {
            cfg.fdts = detail::parse_double(key, val);
        } else if (key == "sigma1_sq") {
            cfg.sigma1_sq = detail::parse_double(key, val);
        } else if (key == "sigma2_sq") {
            cfg.sigma2_sq = detail::parse_double(key, val);
        } else if (key == "Es") {
            cfg.es = detail::parse_double(key, val);
        } else if (key == "ebn0_start") {
            cfg.ebn0_start = detail::parse_double(key, val);
        } else if (key == "ebn0_stop") {
            cfg.ebn0_stop = detail::parse_double(key, val);
        } else if (key == "ebn0_step") {
            cfg.ebn0_step = detail::parse_double(key, val);
        } else if (key == "ebn0") {
            // start:step:stop
            std::vector<std::string> parts;
            std::stringstream ss(val);
            for (std::string p; std::getline(ss, p, ':');) parts.push_back(detail::trim(p));
            if (parts.size() != 3) throw ConfigError(key, "expected start:step:stop");
            cfg.ebn0_start = detail::parse_double(key, parts[0]);
            cfg.ebn0_step = detail::parse_double(key, parts[1]);
            cfg.ebn0_stop = detail::parse_double(key, parts[2]);
        } else if (key == "iterations") {
            cfg.iterations.clear();
            std::stringstream ss(val);
            for (std::string p; std::getline(ss, p, ',');) cfg.iterations.push_back(static_cast<int>(detail::parse_long(key, detail::trim(p))));
        } else if (key == "max_frames") {
            cfg.max_frames = detail::parse_long(key, val);
        } else if (key == "min_errors") {
            cfg.min_errors = detail::parse_long(key, val);
        } else if (key == "min_frame_errors") {
            cfg.min_frame_errors = detail::parse_long(key, val);
        } else if (key == "stop_ber") {
            cfg.stop_ber = detail::parse_double(key, val);
        } else if (key == "seed") {
            const long s = detail::parse_long(key, val);
            if (s < 0) throw ConfigError(key, "must be >= 0");
            cfg.seed = static_cast<std::uint64_t>(s);
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(detail::parse_long(key, val));
        } else if (key == "out_dir") {
            cfg.out_dir = val;
        } else if (key == "alist") {
            cfg.alist_path = val;
        } else if (key == "interleaver") {
            cfg.interleaver_path = val;
        } else if (key == "ldpc_iterations") {
            cfg.ldpc_iterations = static_cast<int>(detail::parse_long(key, val));
        } else if (key == "demod_output") {
            if (val == "extrinsic") cfg.demod_output = DemodOutput::extrinsic;
            else if (val == "app") cfg.demod_output = DemodOutput::app;
            else throw ConfigError(key, "must be extrinsic or app");
        } else if (key == "early_exit") {
            cfg.early_exit = detail::parse_bool(key, val);
        } else if (key == "fade_correlation") {
            if (val == "auto") cfg.fade_correlation.reset();
            else cfg.fade_correlation = detail::parse_double(key, val);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }

    if (!(cfg.fdts >= 0.0)) throw ConfigError("fdTs", "must be >= 0");
    if (!(cfg.sigma1_sq > 0.0)) throw ConfigError("sigma1_sq", "must be > 0");
    if (!(cfg.sigma2_sq > 0.0)) throw ConfigError("sigma2_sq", "must be > 0");
    if (!(cfg.es > 0.0)) throw ConfigError("Es", "must be > 0");
    if (!(cfg.ebn0_step > 0.0)) throw ConfigError("ebn0_step", "must be > 0");
    if (cfg.ebn0_stop < cfg.ebn0_start) throw ConfigError("ebn0_stop", "must be >= ebn0_start (sweep is empty)");
    if (cfg.iterations.empty()) throw ConfigError("iterations", "must list at least one count");
    for (int it : cfg.iterations)
        if (it < 1) throw ConfigError("iterations", "every count must be >= 1");
    std::sort(cfg.iterations.begin(), cfg.iterations.end());
    cfg.iterations.erase(std::unique(cfg.iterations.begin(), cfg.iterations.end()), cfg.iterations.end());
    if (cfg.max_frames < 1) throw ConfigError("max_frames", "must be >= 1");
    if (cfg.min_errors < 1) throw ConfigError("min_errors", "must be >= 1");
    if (cfg.min_frame_errors < 0) throw ConfigError("min_frame_errors", "must be >= 0");
    if (cfg.stop_ber < 0.0) throw ConfigError("stop_ber", "must be >= 0");
    if (cfg.workers < 1) throw ConfigError("workers", "must be >= 1");
    if (cfg.ldpc_iterations < 1) throw ConfigError("ldpc_iterations", "must be >= 1");
    if (cfg.fade_correlation && !(std::abs(*cfg.fade_correlation) <= 1.0))
        throw ConfigError("fade_correlation", "must be auto or in [-1, 1]");
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return validate_config(ss.str());
}

inline std::string asset_dir() {
    if (const char* env = std::getenv("TURBODPSK_ASSET_DIR"); env && *env) return env;
#ifdef TURBODPSK_ASSET_DIR
    return TURBODPSK_ASSET_DIR;
#else
    return "assets";
#endif
}

/// Loaded code assets for one experiment; immutable and shared by workers.
struct CodeAssets {
    std::shared_ptr<const OuterCodec> codec;
    std::shared_ptr<const Interleaver> interleaver;
};

inline CodeAssets load_assets(const ExperimentConfig& cfg) {
    const std::string dir = asset_dir();
    CodeAssets a;
    if (cfg.code == OuterCodeKind::ldpc) {
        const std::string path = cfg.alist_path.empty() ? dir + "/ldpc_1008x504_36.alist" : cfg.alist_path;
        auto code = std::make_shared<const LdpcCode>(LdpcCode::from_alist(path, 504, 3, 6));
        a.codec = std::make_shared<const OuterCodec>(code, cfg.ldpc_iterations);
    } else {
        a.codec = std::make_shared<const OuterCodec>(std::make_shared<const ConvCode>(ConvCode::standard(504)));
    }
    const std::string ipath = cfg.interleaver_path.empty()
                                  ? dir + "/interleaver_" + std::to_string(a.codec->length()) + ".txt"
                                  : cfg.interleaver_path;
    a.interleaver = std::make_shared<const Interleaver>(Interleaver::read_file(ipath));
    if (static_cast<int>(a.interleaver->size()) != a.codec->length())
        throw std::runtime_error("interleaver length does not match the code length");
    return a;
}

// ---------------------------------------------------------------------------

struct BerRecord {
    DetectionMode mode = DetectionMode::coherent;
    OuterCodeKind code = OuterCodeKind::ldpc;
    double fdts = 0.0;
    double ebn0_db = 0.0;
    int iteration = 1;
    long frames = 0;
    long bit_errors = 0;
    double ber = 0.0;
    long frame_errors = 0;
    double seconds = 0.0;
};

inline constexpr const char* kCsvHeader = "mode,code,fdTs,ebn0_db,iteration,frames,bit_errors,ber,frame_errors,seconds";

inline std::string csv_line(const BerRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%g,%.4f,%d,%ld,%ld,%.6e,%ld,%.3f", to_string(r.mode).c_str(),
                  to_string(r.code).c_str(), r.fdts, r.ebn0_db, r.iteration, r.frames, r.bit_errors, r.ber,
                  r.frame_errors, r.seconds);
    return buf;
}

inline void write_csv(std::ostream& out, const std::vector<BerRecord>& recs) {
    out << kCsvHeader << '\n';
    for (const auto& r : recs) out << csv_line(r) << '\n';
}

inline std::vector<BerRecord> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kCsvHeader) throw std::runtime_error("csv: missing or wrong header");
    std::vector<BerRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string p; std::getline(ss, p, ',');) f.push_back(p);
        if (f.size() != 10) throw std::runtime_error("csv: line " + std::to_string(lineno) + " has wrong field count");
        BerRecord r;
        if (f[0] == "coherent") r.mode = DetectionMode::coherent;
        else if (f[0] == "noncoherent") r.mode = DetectionMode::noncoherent;
        else throw std::runtime_error("csv: bad mode on line " + std::to_string(lineno));
        if (f[1] == "ldpc") r.code = OuterCodeKind::ldpc;
        else if (f[1] == "conv") r.code = OuterCodeKind::conv;
        else throw std::runtime_error("csv: bad code on line " + std::to_string(lineno));
        try {
            r.fdts = std::stod(f[2]);
            r.ebn0_db = std::stod(f[3]);
            r.iteration = std::stoi(f[4]);
            r.frames = std::stol(f[5]);
            r.bit_errors = std::stol(f[6]);
            r.ber = std::stod(f[7]);
            r.frame_errors = std::stol(f[8]);
            r.seconds = std::stod(f[9]);
        } catch (const std::exception&) {
            throw std::runtime_error("csv: bad number on line " + std::to_string(lineno));
        }
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct FrameOutcome {
    std::vector<long> errors;  ///< XOR-bit errors after each iteration 1..max
};

/// One source-pair frame through the whole chain. All randomness comes from
/// `rng`, so a frame is reproducible from its derived seed alone.
inline FrameOutcome simulate_frame(const ExperimentConfig& cfg, const CodeAssets& assets, const ChannelParams& params,
                                   Rng& rng) {
    const OuterCodec& codec = *assets.codec;
    const Interleaver& pi = *assets.interleaver;
    const auto k = static_cast<std::size_t>(codec.info_length());
    auto random_bits = [&](std::size_t n) {
        std::vector<std::uint8_t> b(n);
        for (auto& v : b) v = static_cast<std::uint8_t>(rng() >> 63);
        return BitSeq(std::move(b), BitRole::info);
    };
    const BitSeq d1 = random_bits(k);
    const BitSeq d2 = random_bits(k);
    const BitSeq c1 = codec.encode(d1);
    const BitSeq c2 = codec.encode(d2);
    const BitSeq cr = xor_reference(c1, c2);

    const BitSeq c1i(pi.interleave(c1.bits));
    const BitSeq c2i(pi.interleave(c2.bits));
    const SymbolSeq x1 = differential_encode(c1i, kReferenceSymbol, params.es);
    const SymbolSeq x2 = differential_encode(c2i, kReferenceSymbol, params.es);
    const ChannelRealization ch = draw_realization(x1.size(), params, rng);
    const CplxSeq r = mac_transmit(x1, x2, ch);

    TurboConfig tc;
    tc.num_iterations = cfg.max_iteration();
    tc.mode = cfg.mode;
    tc.demod_output = cfg.demod_output;
    tc.early_exit = cfg.early_exit;
    const ChannelRealization* csi = cfg.mode == DetectionMode::coherent ? &ch : nullptr;
    const RelayResult res = relay_receive(r, tc, codec, pi, csi, params, &cr);

    FrameOutcome out;
    for (const auto& st : res.trace) out.errors.push_back(st.xor_bit_errors);
    return out;
}

inline ChannelParams channel_params_for(const ExperimentConfig& cfg, double rate, double ebn0_db) {
    ChannelParams p;
    p.sigma1_sq = cfg.sigma1_sq;
    p.sigma2_sq = cfg.sigma2_sq;
    p.es = cfg.es;
    p.fdts = cfg.fdts;
    p.fade_correlation = cfg.fade_correlation.value_or(jakes_lag1_correlation(cfg.fdts));
    p.delta_sq = ebn0_to_noise_var(ebn0_db, rate, cfg.es, cfg.sigma1_sq, cfg.sigma2_sq);
    return p;
}

/// Frames are simulated in fixed-size batches; the stopping rule is checked
/// only between batches, so worker count never changes the frame set.
inline constexpr long kFrameBatch = 32;

using ProgressFn = std::function<void(const std::vector<BerRecord>&)>;

inline std::vector<BerRecord> run_sweep(const ExperimentConfig& cfg, const CodeAssets& assets,
                                        const ProgressFn& progress = {}) {
    const auto points = cfg.ebn0_points();
    if (points.empty()) throw ConfigError("ebn0", "sweep is empty");
    const int max_it = cfg.max_iteration();
    const auto bits_per_frame = static_cast<double>(assets.codec->length());
    std::vector<BerRecord> all;

    for (std::size_t pidx = 0; pidx < points.size(); ++pidx) {
        const auto t0 = std::chrono::steady_clock::now();
        const ChannelParams params = channel_params_for(cfg, assets.codec->rate(), points[pidx]);
        std::vector<long> bit_err(static_cast<std::size_t>(max_it), 0), frame_err(static_cast<std::size_t>(max_it), 0);
        long frames = 0;

        auto enough = [&] {
            for (int it : cfg.iterations)
                if (bit_err[static_cast<std::size_t>(it - 1)] < cfg.min_errors ||
                    frame_err[static_cast<std::size_t>(it - 1)] < cfg.min_frame_errors)
                    return false;
            return true;
        };

        while (frames < cfg.max_frames && !enough()) {
            const long batch = std::min(kFrameBatch, cfg.max_frames - frames);
            std::vector<FrameOutcome> outcomes(static_cast<std::size_t>(batch));
            std::atomic<long> next{0};
            std::exception_ptr failure;
            std::mutex fail_mu;
            auto work = [&] {
                try {
                    for (long i; (i = next.fetch_add(1)) < batch;) {
                        Rng rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(frames + i), pidx + 1);
                        outcomes[static_cast<std::size_t>(i)] = simulate_frame(cfg, assets, params, rng);
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lock(fail_mu);
                    if (!failure) failure = std::current_exception();
                }
            };
            const int nthreads = static_cast<int>(std::min<long>(cfg.workers, batch));
            if (nthreads <= 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
                for (auto& t : pool) t.join();
            }
            if (failure) std::rethrow_exception(failure);
            for (const auto& o : outcomes)
                for (int it = 0; it < max_it; ++it) {
                    bit_err[static_cast<std::size_t>(it)] += o.errors[static_cast<std::size_t>(it)];
                    frame_err[static_cast<std::size_t>(it)] += o.errors[static_cast<std::size_t>(it)] > 0;
                }
            frames += batch;
        }

        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool all_below = cfg.stop_ber > 0.0;
        std::vector<BerRecord> point_recs;
        for (int it : cfg.iterations) {
            BerRecord r;
            r.mode = cfg.mode;
            r.code = cfg.code;
            r.fdts = cfg.fdts;
            r.ebn0_db = points[pidx];
            r.iteration = it;
            r.frames = frames;
            r.bit_errors = bit_err[static_cast<std::size_t>(it - 1)];
            r.ber = static_cast<double>(r.bit_errors) / (static_cast<double>(frames) * bits_per_frame);
            r.frame_errors = frame_err[static_cast<std::size_t>(it - 1)];
            r.seconds = secs;
            all_below = all_below && r.ber < cfg.stop_ber;
            point_recs.push_back(r);
        }
        all.insert(all.end(), point_recs.begin(), point_recs.end());
        if (progress) progress(point_recs);
        if (all_below) break;
    }
    return all;
}

// ---------------------------------------------------------------------------

/// Eb/N0 at which the curve for `iteration` first falls to `target` BER,
/// interpolating log10(BER) linearly between neighbouring points. A point
/// with no errors is taken at 0.5 error events, an upper bound on its BER.
inline std::optional<double> required_ebn0(const std::vector<BerRecord>& recs, int iteration, double target,
                                           double bits_per_frame,
                                           std::optional<DetectionMode> mode = std::nullopt,
                                           std::optional<OuterCodeKind> code = std::nullopt) {
    std::vector<BerRecord> c;
    for (const auto& r : recs)
        if (r.iteration == iteration && (!mode || r.mode == *mode) && (!code || r.code == *code)) c.push_back(r);
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.ebn0_db < b.ebn0_db; });
    auto lber = [&](const BerRecord& r) {
        return std::log10(r.ber > 0.0 ? r.ber : 0.5 / (static_cast<double>(r.frames) * bits_per_frame));
    };
    const double yt = std::log10(target);
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (lber(c[i]) > yt) continue;
        if (i == 0) return std::nullopt;  // below target already at the first point
        const double y0 = lber(c[i - 1]), y1 = lber(c[i]);
        return c[i - 1].ebn0_db + (yt - y0) / (y1 - y0) * (c[i].ebn0_db - c[i - 1].ebn0_db);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// SVG plot. Deterministic output (fixed formatting) so it can be golden-tested.

inline std::string emit_plot_svg(const std::vector<BerRecord>& recs, const std::string& title = "") {
    if (recs.empty()) throw std::invalid_argument("emit_plot: no records");

    struct Key {
        DetectionMode mode;
        OuterCodeKind code;
        int iteration;
        bool operator<(const Key& o) const {
            if (iteration != o.iteration) return iteration < o.iteration;
            if (mode != o.mode) return mode < o.mode;
            return code < o.code;
        }
    };
    std::map<Key, std::vector<BerRecord>> curves;
    std::set<std::pair<DetectionMode, OuterCodeKind>> families;
    for (const auto& r : recs) {
        curves[{r.mode, r.code, r.iteration}].push_back(r);
        families.insert({r.mode, r.code});
    }
    for (auto& [k, v] : curves)
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.ebn0_db < b.ebn0_db; });

    double xmin = recs.front().ebn0_db, xmax = xmin;
    double min_pos = 1.0;
    for (const auto& r : recs) {
        xmin = std::min(xmin, r.ebn0_db);
        xmax = std::max(xmax, r.ebn0_db);
        if (r.ber > 0.0) min_pos = std::min(min_pos, r.ber);
    }
    if (xmax - xmin < 1e-9) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    // y axis spans whole decades; censored points sit on the bottom edge
    const int top_dec = 0;
    int bot_dec = static_cast<int>(std::floor(std::log10(min_pos))) - 1;
    if (bot_dec >= top_dec) bot_dec = top_dec - 1;

    const double W = 640, H = 480, L = 70, R = 170, T = 40, B = 50;
    const double pw = W - L - R, ph = H - T - B;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ber) {
        const double d = ber > 0.0 ? std::log10(ber) : static_cast<double>(bot_dec);
        const double c = std::clamp(d, static_cast<double>(bot_dec), static_cast<double>(top_dec));
        return T + (static_cast<double>(top_dec) - c) / static_cast<double>(top_dec - bot_dec) * ph;
    };
    auto f = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.2f", v);
        return std::string(b);
    };

    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) s << "<text x=\"" << f(L + pw / 2) << "\" y=\"22\" text-anchor=\"middle\">" << title << "</text>\n";
    // grid and ticks
    for (int d = bot_dec; d <= top_dec; ++d) {
        const double y = T + static_cast<double>(top_dec - d) / static_cast<double>(top_dec - bot_dec) * ph;
        s << "<line x1=\"" << f(L) << "\" y1=\"" << f(y) << "\" x2=\"" << f(L + pw) << "\" y2=\"" << f(y)
          << "\" stroke=\"#dddddd\"/>\n";
        s << "<text x=\"" << f(L - 6) << "\" y=\"" << f(y + 4) << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    const double xstep = (xmax - xmin) > 10 ? 2.0 : 1.0;
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9; x += xstep) {
        s << "<line x1=\"" << f(px(x)) << "\" y1=\"" << f(T) << "\" x2=\"" << f(px(x)) << "\" y2=\"" << f(T + ph)
          << "\" stroke=\"#dddddd\"/>\n";
        s << "<text x=\"" << f(px(x)) << "\" y=\"" << f(T + ph + 16) << "\" text-anchor=\"middle\">" << f(x) << "</text>\n";
    }
    s << "<rect x=\"" << f(L) << "\" y=\"" << f(T) << "\" width=\"" << f(pw) << "\" height=\"" << f(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << f(L + pw / 2) << "\" y=\"" << f(H - 10) << "\" text-anchor=\"middle\">Eb/N0 (dB)</text>\n";
    s << "<text x=\"16\" y=\"" << f(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << f(T + ph / 2)
      << ")\">XOR BER</text>\n";

    std::size_t ci = 0;
    double ly = T + 10;
    for (const auto& [k, pts] : curves) {
        const char* col = colours[ci++ % (sizeof colours / sizeof *colours)];
        std::string label = "iter " + std::to_string(k.iteration);
        if (families.size() > 1) label = to_string(k.mode) + "/" + to_string(k.code) + " " + label;

        // solid line through measured points only
        std::string path;
        for (const auto& p : pts)
            if (p.ber > 0.0) path += (path.empty() ? "M" : " L") + f(px(p.ebn0_db)) + " " + f(py(p.ber));
        if (!path.empty()) s << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\"/>\n";
        for (const auto& p : pts) {
            const double x = px(p.ebn0_db), y = py(p.ber);
            if (p.ber > 0.0) {
                s << "<circle cx=\"" << f(x) << "\" cy=\"" << f(y) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
            } else {
                // censored: no errors observed, drawn as a down-pointing triangle on the floor
                s << "<path class=\"censored\" d=\"M" << f(x - 4) << ' ' << f(y - 7) << " L" << f(x + 4) << ' '
                  << f(y - 7) << " L" << f(x) << ' ' << f(y) << " Z\" fill=\"none\" stroke=\"" << col << "\"/>\n";
            }
        }
        s << "<line x1=\"" << f(L + pw + 10) << "\" y1=\"" << f(ly) << "\" x2=\"" << f(L + pw + 30) << "\" y2=\"" << f(ly)
          << "\" stroke=\"" << col << "\" stroke-width=\"1.5\"/>\n";
        s << "<text x=\"" << f(L + pw + 34) << "\" y=\"" << f(ly + 4) << "\">" << label << "</text>\n";
        ly += 18;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace turbodpsk
