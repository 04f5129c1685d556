#pragma once

// Rayleigh flat fading (Jakes spectrum) and the two-user multiple-access channel
//   r(k) = h1(k) x1(k) + h2(k) x2(k) + n(k).
//
// Variance bookkeeping: sigma_i^2 and delta^2 are per-dimension, so E|h_i|^2 =
// 2 sigma_i^2 and E|n|^2 = 2 delta^2.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "turbodpsk/rng.hpp"
#include "turbodpsk/types.hpp"

namespace turbodpsk {

struct ChannelParams {
    double sigma1_sq = 0.5;
    double sigma2_sq = 0.5;
    double delta_sq = 0.5;
    double es = 1.0;
    double fdts = 0.03;
    /// Correlation E[h(k) h*(k-1)] / E|h|^2 assumed by the noncoherent metric.
    /// 1 treats h as constant over the two-symbol window.
    double fade_correlation = 1.0;

    void validate() const {
        if (!(sigma1_sq > 0.0)) throw std::invalid_argument("ChannelParams: sigma1_sq must be > 0");
        if (!(sigma2_sq > 0.0)) throw std::invalid_argument("ChannelParams: sigma2_sq must be > 0");
        if (!(delta_sq > 0.0)) throw std::invalid_argument("ChannelParams: delta_sq must be > 0");
        if (!(es > 0.0)) throw std::invalid_argument("ChannelParams: Es must be > 0");
        if (!(fdts >= 0.0)) throw std::invalid_argument("ChannelParams: fdTs must be >= 0");
        if (!(std::abs(fade_correlation) <= 1.0)) throw std::invalid_argument("ChannelParams: fade_correlation must be in [-1, 1]");
    }
};

struct ChannelRealization {
    CplxSeq h1;
    CplxSeq h2;
    CplxSeq noise;

    std::size_t size() const { return h1.size(); }
};

/// Lag-one autocorrelation coefficient of a Jakes process, J0(2 pi fdTs).
inline double jakes_lag1_correlation(double fdts) { return std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * fdts); }

inline cplx complex_gaussian(Rng& rng, double total_variance) {
    std::normal_distribution<double> g(0.0, std::sqrt(total_variance / 2.0));
    const double re = g(rng);
    const double im = g(rng);
    return {re, im};
}

namespace detail {

inline fftw_plan backward_plan(int m) {
    static std::mutex mu;
    static std::map<int, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mu);
    auto it = plans.find(m);
    if (it != plans.end()) return it->second;
    // Planning needs scratch arrays; FFTW_ESTIMATE does not touch them.
    std::vector<cplx> scratch(static_cast<std::size_t>(m));
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(m, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(m, plan);
    return plan;
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace detail

/// Rayleigh fading gains with autocorrelation total_variance * J0(2 pi fdTs m),
/// generated by shaping white Gaussian spectral lines with the Jakes Doppler
/// spectrum and inverse-transforming (IDFT method). fdTs == 0 gives a gain that
/// is constant over the whole sequence.
inline CplxSeq jakes_fading(std::size_t length, double total_variance, double fdts, Rng& rng) {
    if (length < 1) throw std::invalid_argument("jakes_fading: length must be >= 1");
    if (!(total_variance > 0.0)) throw std::invalid_argument("jakes_fading: variance must be > 0");
    if (!(fdts >= 0.0)) throw std::invalid_argument("jakes_fading: fdTs must be >= 0");

    constexpr std::size_t kMaxFft = std::size_t{1} << 24;
    std::size_t m = 0;
    std::size_t km = 0;
    if (fdts > 0.0) {
        // At least 32 spectral lines inside the Doppler band.
        const double want = std::max<double>(static_cast<double>(length), std::ceil(32.0 / fdts));
        m = detail::next_pow2(static_cast<std::size_t>(std::min<double>(want, static_cast<double>(kMaxFft))));
        if (fdts >= 0.5) fdts = 0.5 - 1.0 / static_cast<double>(m);
        km = static_cast<std::size_t>(std::floor(fdts * static_cast<double>(m)));
    }
    if (km < 1) {
        // Doppler below the spectral resolution: quasi-static gain.
        return CplxSeq(length, complex_gaussian(rng, total_variance));
    }

    const double mf = static_cast<double>(m) * fdts;
    std::vector<double> filt(m, 0.0);
    for (std::size_t k = 1; k < km; ++k) {
        const double ratio = static_cast<double>(k) / mf;
        filt[k] = std::sqrt(1.0 / (2.0 * std::sqrt(1.0 - ratio * ratio)));
        filt[m - k] = filt[k];
    }
    const double kmd = static_cast<double>(km);
    filt[km] = std::sqrt(kmd / 2.0 *
                         (std::numbers::pi / 2.0 - std::atan((kmd - 1.0) / std::sqrt(2.0 * kmd - 1.0))));
    filt[m - km] = filt[km];

    double power = 0.0;
    std::vector<cplx> spec(m);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t k = 0; k < m; ++k) {
        const double a = g(rng);
        const double b = g(rng);
        spec[k] = filt[k] * cplx(a, -b);
        power += 2.0 * filt[k] * filt[k];
    }
    auto* p = reinterpret_cast<fftw_complex*>(spec.data());
    fftw_execute_dft(detail::backward_plan(static_cast<int>(m)), p, p);

    const double scale = std::sqrt(total_variance / power);
    CplxSeq out(spec.begin(), spec.begin() + static_cast<std::ptrdiff_t>(length));
    for (auto& v : out) v *= scale;
    return out;
}

inline CplxSeq jakes_fading(std::size_t length, double total_variance, double fdts, std::uint64_t seed) {
    Rng rng(seed);
    return jakes_fading(length, total_variance, fdts, rng);
}

/// Draws independent h1, h2 (Jakes) and the noise sequence for one frame.
inline ChannelRealization draw_realization(std::size_t length, const ChannelParams& params, Rng& rng) {
    params.validate();
    ChannelRealization out;
    out.h1 = jakes_fading(length, 2.0 * params.sigma1_sq, params.fdts, rng);
    out.h2 = jakes_fading(length, 2.0 * params.sigma2_sq, params.fdts, rng);
    out.noise.resize(length);
    for (auto& n : out.noise) n = complex_gaussian(rng, 2.0 * params.delta_sq);
    return out;
}

inline CplxSeq mac_transmit(const SymbolSeq& x1, const SymbolSeq& x2, const ChannelRealization& ch) {
    const std::size_t n = x1.size();
    if (x2.size() != n || ch.h1.size() != n || ch.h2.size() != n || ch.noise.size() != n)
        throw std::invalid_argument("mac_transmit: length mismatch");
    CplxSeq r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = ch.h1[k] * x1[k] + ch.h2[k] * x2[k] + ch.noise[k];
    return r;
}

/// Per-dimension noise variance delta^2 for a given Eb/N0, where Eb is the
/// average received energy per information bit of one source,
/// Eb = Es * 2 sigma_avg^2 / rate, and N0 = 2 delta^2.
inline double ebn0_to_noise_var(double ebn0_db, double code_rate, double es, double sigma1_sq, double sigma2_sq) {
    if (!(code_rate > 0.0) || code_rate > 1.0)
        throw std::invalid_argument("ebn0_to_noise_var: code_rate must be in (0, 1]");
    const double two_sigma_avg = sigma1_sq + sigma2_sq;
    return es * two_sigma_avg / (2.0 * code_rate * std::pow(10.0, ebn0_db / 10.0));
}

}  // namespace turbodpsk
