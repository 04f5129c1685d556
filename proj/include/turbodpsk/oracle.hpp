#pragma once

// Brute-force references for tests. Nothing here shares code with the
// forward-backward recursion: the joint MAP oracle enumerates every label
// sequence and marginalises the product of branch likelihoods directly.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "turbodpsk/channel.hpp"
#include "turbodpsk/joint_trellis.hpp"

namespace turbodpsk::oracle {

inline constexpr int kMaxEpochs = 8;

struct OracleResult {
    JointApp app;
    double log_evidence = 0.0;  ///< log sum over sequences of prior x likelihood
};

/// Exact per-epoch label APPs by enumerating all 4^N label sequences, starting
/// from the reference state (+1,+1). `prior` may be empty (uniform).
inline OracleResult exhaustive_joint_map(const CplxSeq& r, DetectionMode mode, const ChannelRealization* csi,
                                         const ChannelParams& params, const PriorTable& prior = {}) {
    if (r.size() < 2) throw std::invalid_argument("exhaustive_joint_map: need at least 2 observations");
    const std::size_t n = r.size() - 1;
    if (n > static_cast<std::size_t>(kMaxEpochs)) throw std::invalid_argument("exhaustive_joint_map: N too large for enumeration");
    if (!prior.empty() && prior.size() != n) throw std::invalid_argument("exhaustive_joint_map: prior length");
    if (mode == DetectionMode::coherent && (csi == nullptr || csi->h1.size() != r.size() || csi->h2.size() != r.size()))
        throw std::invalid_argument("exhaustive_joint_map: coherent mode needs CSI of matching length");

    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) total *= 4;

    std::vector<double> logw(total);
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<int> labels(n);
    for (std::size_t seq = 0; seq < total; ++seq) {
        std::size_t code = seq;
        for (std::size_t k = 0; k < n; ++k) {
            labels[k] = static_cast<int>(code & 3u);
            code >>= 2;
        }
        double lw = 0.0;
        TrellisState s{1, 1};
        for (std::size_t k = 0; k < n && std::isfinite(lw); ++k) {
            const BranchLabel l = BranchLabel::from_index(labels[k]);
            const double pr = prior.empty() ? 0.25 : prior[k][static_cast<std::size_t>(labels[k])];
            if (pr <= 0.0) {
                lw = -std::numeric_limits<double>::infinity();
                break;
            }
            lw += std::log(pr);
            lw += mode == DetectionMode::coherent
                      ? log_coherent_likelihood(r[k + 1], csi->h1[k + 1], csi->h2[k + 1], s, l, params)
                      : log_noncoherent_likelihood(r[k + 1], r[k], s, l, params);
            s = TrellisState{s.u1 * l.d1(), s.u2 * l.d2()};
        }
        logw[seq] = lw;
        if (lw > peak) peak = lw;
    }
    if (!std::isfinite(peak)) throw std::runtime_error("exhaustive_joint_map: every sequence has zero weight");

    OracleResult out;
    out.app.assign(n, LabelProbs{});
    double z = 0.0;
    for (std::size_t seq = 0; seq < total; ++seq) {
        const double w = std::exp(logw[seq] - peak);
        z += w;
        std::size_t code = seq;
        for (std::size_t k = 0; k < n; ++k) {
            out.app[k][code & 3u] += w;
            code >>= 2;
        }
    }
    for (auto& p : out.app)
        for (double& v : p) v /= z;
    out.log_evidence = peak + std::log(z);
    return out;
}

struct ConditionalStatsEstimate {
    cplx slope;               ///< least-squares coefficient of r(k) on r(k-1)
    double residual_variance;  ///< mean |r(k) - slope r(k-1)|^2
    double var_prev;           ///< mean |r(k-1)|^2
};

/// Monte Carlo check of the noncoherent conditional statistics: h1, h2 drawn
/// once per sample and held over both epochs, fresh noise at each epoch.
inline ConditionalStatsEstimate mc_conditional_stats(TrellisState s, BranchLabel l, const ChannelParams& p,
                                                     long num_samples, std::uint64_t seed) {
    if (num_samples < 2) throw std::invalid_argument("mc_conditional_stats: need samples");
    Rng rng(seed);
    const double amp = std::sqrt(p.es);
    const cplx x1p = amp * s.u1, x2p = amp * s.u2;
    const cplx x1 = x1p * static_cast<double>(l.d1()), x2 = x2p * static_cast<double>(l.d2());

    std::vector<cplx> rp(static_cast<std::size_t>(num_samples)), rc(static_cast<std::size_t>(num_samples));
    cplx cross{0.0, 0.0};
    double pp = 0.0;
    for (long i = 0; i < num_samples; ++i) {
        const cplx h1 = complex_gaussian(rng, 2.0 * p.sigma1_sq);
        const cplx h2 = complex_gaussian(rng, 2.0 * p.sigma2_sq);
        const cplx n0 = complex_gaussian(rng, 2.0 * p.delta_sq);
        const cplx n1 = complex_gaussian(rng, 2.0 * p.delta_sq);
        const cplx a = h1 * x1p + h2 * x2p + n0;
        const cplx b = h1 * x1 + h2 * x2 + n1;
        rp[static_cast<std::size_t>(i)] = a;
        rc[static_cast<std::size_t>(i)] = b;
        cross += b * std::conj(a);
        pp += std::norm(a);
    }
    ConditionalStatsEstimate est;
    est.slope = cross / pp;
    double res = 0.0;
    for (long i = 0; i < num_samples; ++i)
        res += std::norm(rc[static_cast<std::size_t>(i)] - est.slope * rp[static_cast<std::size_t>(i)]);
    est.residual_variance = res / static_cast<double>(num_samples);
    est.var_prev = pp / static_cast<double>(num_samples);
    return est;
}

}  // namespace turbodpsk::oracle
