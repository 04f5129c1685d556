#pragma once

// Soft-in soft-out demodulator for two superimposed DBPSK signals.
//
// Trellis: state s_k = (u1(k-1), u2(k-1)), four states; label (c1,c2), four
// branches per state, next state (u1*(2c1-1), u2*(2c2-1)). Indices:
//   state  = 2*[u1 == -1] + [u2 == -1]
//   label  = 2*c1 + c2
// Epoch k of an N-bit frame covers symbols k and k+1 of the N+1 observations.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "turbodpsk/channel.hpp"
#include "turbodpsk/types.hpp"

namespace turbodpsk {

inline constexpr int kNumStates = 4;
inline constexpr int kNumLabels = 4;

struct TrellisState {
    int u1 = 1;
    int u2 = 1;

    constexpr int index() const { return 2 * (u1 < 0) + (u2 < 0); }
    static constexpr TrellisState from_index(int i) { return {(i & 2) ? -1 : 1, (i & 1) ? -1 : 1}; }
    friend constexpr bool operator==(TrellisState, TrellisState) = default;
};

struct BranchLabel {
    int c1 = 0;
    int c2 = 0;

    constexpr int index() const { return 2 * c1 + c2; }
    constexpr int d1() const { return 2 * c1 - 1; }
    constexpr int d2() const { return 2 * c2 - 1; }
    constexpr int xor_bit() const { return c1 ^ c2; }
    static constexpr BranchLabel from_index(int i) { return {(i >> 1) & 1, i & 1}; }
    friend constexpr bool operator==(BranchLabel, BranchLabel) = default;
};

inline constexpr TrellisState next_state(TrellisState s, BranchLabel l) {
    return {s.u1 * l.d1(), s.u2 * l.d2()};
}

struct Trellis {
    // next[s][l]
    std::array<std::array<int, kNumLabels>, kNumStates> next{};
    // prev[s'][l]: the unique predecessor reaching s' under label l
    std::array<std::array<int, kNumLabels>, kNumStates> prev{};
};

inline constexpr Trellis build_trellis() {
    Trellis t;
    for (int s = 0; s < kNumStates; ++s)
        for (int l = 0; l < kNumLabels; ++l) {
            const int n = next_state(TrellisState::from_index(s), BranchLabel::from_index(l)).index();
            t.next[s][l] = n;
            t.prev[n][l] = s;
        }
    return t;
}

inline constexpr Trellis kTrellis = build_trellis();

enum class DetectionMode { coherent, noncoherent };

// ---------------------------------------------------------------------------
// Branch metrics. The log_ variants are what the recursion and the oracle use;
// the linear forms exist for direct inspection.

inline double log_coherent_likelihood(cplx r, cplx h1, cplx h2, TrellisState s, BranchLabel l,
                                      const ChannelParams& p) {
    const double amp = std::sqrt(p.es);
    const TrellisState n = next_state(s, l);
    const cplx residual = r - h1 * (amp * n.u1) - h2 * (amp * n.u2);
    return -std::norm(residual) / (2.0 * p.delta_sq);
}

inline double coherent_branch_metric(cplx r, cplx h1, cplx h2, TrellisState s, BranchLabel l, double prior,
                                     const ChannelParams& p) {
    if (prior <= 0.0) return 0.0;
    return prior * std::exp(log_coherent_likelihood(r, h1, h2, s, l, p));
}

/// Conditional statistics of r(k) given r(k-1) and the symbol pairs at k-1, k.
/// With params.fade_correlation == 1, h is constant over both epochs; a value
/// rho < 1 scales the cross-covariance for a fading process that drifts
/// between the two symbols. All variances are total (E|.|^2).
struct NoncoherentStats {
    double sigma_r_sq = 0.0;  ///< Var r(k-1) = 2 s1^2 Es + 2 s2^2 Es + 2 delta^2
    cplx mr_coeff;            ///< E[r(k) | r(k-1)] = mr_coeff * r(k-1)
    double delta_r_sq = 0.0;  ///< Var[r(k) | r(k-1)]
};

inline NoncoherentStats noncoherent_stats(TrellisState s, BranchLabel l, const ChannelParams& p) {
    const double amp = std::sqrt(p.es);
    const TrellisState n = next_state(s, l);
    const cplx x1p = amp * s.u1, x2p = amp * s.u2;
    const cplx x1 = amp * n.u1, x2 = amp * n.u2;

    NoncoherentStats st;
    st.sigma_r_sq = 2.0 * p.sigma1_sq * p.es + 2.0 * p.sigma2_sq * p.es + 2.0 * p.delta_sq;
    // Cov(r(k), r(k-1)) = E[r(k) r*(k-1)]
    const cplx cov =
        p.fade_correlation * (2.0 * p.sigma1_sq * x1 * std::conj(x1p) + 2.0 * p.sigma2_sq * x2 * std::conj(x2p));
    st.mr_coeff = cov / st.sigma_r_sq;
    // Var r(k) equals sigma_r_sq for constant-modulus symbols.
    st.delta_r_sq = st.sigma_r_sq - std::norm(cov) / st.sigma_r_sq;
    return st;
}

/// log p(r(k) | r(k-1), symbols) as a circular complex Gaussian. The factor
/// p(r(k-1) | symbols) is the same for every branch and is left out.
inline double log_noncoherent_likelihood(cplx r, cplx r_prev, TrellisState s, BranchLabel l,
                                         const ChannelParams& p) {
    const NoncoherentStats st = noncoherent_stats(s, l, p);
    const cplx mean = st.mr_coeff * r_prev;
    return -std::log(std::numbers::pi * st.delta_r_sq) - std::norm(r - mean) / st.delta_r_sq;
}

inline double noncoherent_branch_metric(cplx r, cplx r_prev, TrellisState s, BranchLabel l, double prior,
                                        const ChannelParams& p) {
    if (prior <= 0.0) return 0.0;
    return prior * std::exp(log_noncoherent_likelihood(r, r_prev, s, l, p));
}

// ---------------------------------------------------------------------------
// Recursions

/// gamma[k][s][l], k = 0..N-1
using MetricTable = std::vector<std::array<std::array<double, kNumLabels>, kNumStates>>;
using StateDist = std::array<double, kNumStates>;

struct ForwardBackward {
    std::vector<StateDist> alpha;  ///< N+1 entries, alpha[0] = init
    std::vector<StateDist> beta;   ///< N+1 entries, beta[N] uniform
};

inline constexpr StateDist kKnownReferenceState{1.0, 0.0, 0.0, 0.0};

inline ForwardBackward forward_backward(const MetricTable& gamma, const StateDist& init = kKnownReferenceState) {
    const std::size_t n = gamma.size();
    ForwardBackward fb;
    fb.alpha.assign(n + 1, StateDist{});
    fb.beta.assign(n + 1, StateDist{});

    auto normalise = [](StateDist& d, const char* what) {
        double z = 0.0;
        for (double v : d) z += v;
        if (!(z > 0.0) || !std::isfinite(z)) throw std::runtime_error(std::string("forward_backward: dead trellis in ") + what);
        for (double& v : d) v /= z;
    };

    fb.alpha[0] = init;
    normalise(fb.alpha[0], "initial distribution");
    for (std::size_t k = 0; k < n; ++k) {
        StateDist next{};
        for (int s = 0; s < kNumStates; ++s) {
            const double a = fb.alpha[k][s];
            if (a == 0.0) continue;
            for (int l = 0; l < kNumLabels; ++l) next[kTrellis.next[s][l]] += a * gamma[k][s][l];
        }
        normalise(next, "alpha");
        fb.alpha[k + 1] = next;
    }

    fb.beta[n] = StateDist{0.25, 0.25, 0.25, 0.25};
    for (std::size_t k = n; k-- > 0;) {
        StateDist cur{};
        for (int s = 0; s < kNumStates; ++s)
            for (int l = 0; l < kNumLabels; ++l) cur[s] += gamma[k][s][l] * fb.beta[k + 1][kTrellis.next[s][l]];
        normalise(cur, "beta");
        fb.beta[k] = cur;
    }
    return fb;
}

/// Pr(c1(k), c2(k) | r) from alpha_k, gamma_k and beta_{k+1}.
inline JointApp joint_app(const ForwardBackward& fb, const MetricTable& gamma) {
    const std::size_t n = gamma.size();
    if (fb.alpha.size() != n + 1 || fb.beta.size() != n + 1)
        throw std::invalid_argument("joint_app: inconsistent lengths");
    JointApp app(n);
    for (std::size_t k = 0; k < n; ++k) {
        LabelProbs p{};
        for (int s = 0; s < kNumStates; ++s)
            for (int l = 0; l < kNumLabels; ++l)
                p[l] += fb.alpha[k][s] * gamma[k][s][l] * fb.beta[k + 1][kTrellis.next[s][l]];
        const double z = p[0] + p[1] + p[2] + p[3];
        if (!(z > 0.0)) throw std::runtime_error("joint_app: zero normaliser");
        for (double& v : p) v /= z;
        app[k] = p;
    }
    return app;
}

/// log Pr(c1^c2 = 1) / Pr(c1^c2 = 0), clamped to +-lmax.
inline double xor_llr(const LabelProbs& p, double lmax = kLlrMax) {
    const double one = p[1] + p[2];
    const double zero = p[0] + p[3];
    if (one <= 0.0 && zero <= 0.0) return 0.0;
    if (one <= 0.0) return -lmax;
    if (zero <= 0.0) return lmax;
    return clamp_llr(std::log(one / zero), lmax);
}

inline LlrSeq xor_llr(const JointApp& app, double lmax = kLlrMax) {
    LlrSeq out(app.size());
    for (std::size_t k = 0; k < app.size(); ++k) out[k] = xor_llr(app[k], lmax);
    return out;
}

/// XOR log-ratio implied by a prior table entry.
inline double prior_xor_llr(const LabelProbs& p, double lmax = kLlrMax) { return xor_llr(p, lmax); }

/// Branch metrics for a whole frame. Each epoch is scaled so that its largest
/// entry is 1 (the recursions are invariant to per-epoch scale).
inline MetricTable branch_metrics(const CplxSeq& r, DetectionMode mode, const ChannelRealization* csi,
                                  const PriorTable& prior, const ChannelParams& params) {
    if (r.size() < 2) throw std::invalid_argument("demodulate: need at least 2 observations");
    const std::size_t n = r.size() - 1;
    if (prior.size() != n) throw std::invalid_argument("demodulate: prior length must be N");
    if (mode == DetectionMode::coherent) {
        if (csi == nullptr) throw std::invalid_argument("demodulate: coherent mode requires CSI");
        if (csi->h1.size() != r.size() || csi->h2.size() != r.size())
            throw std::invalid_argument("demodulate: CSI length mismatch");
    }

    MetricTable gamma(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::array<std::array<double, kNumLabels>, kNumStates> logm{};
        double peak = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < kNumStates; ++s)
            for (int l = 0; l < kNumLabels; ++l) {
                const double pr = prior[k][l];
                if (pr <= 0.0) {
                    logm[s][l] = -std::numeric_limits<double>::infinity();
                    continue;
                }
                const TrellisState st = TrellisState::from_index(s);
                const BranchLabel lb = BranchLabel::from_index(l);
                const double ll = mode == DetectionMode::coherent
                                      ? log_coherent_likelihood(r[k + 1], csi->h1[k + 1], csi->h2[k + 1], st, lb, params)
                                      : log_noncoherent_likelihood(r[k + 1], r[k], st, lb, params);
                logm[s][l] = std::log(pr) + ll;
                peak = std::max(peak, logm[s][l]);
            }
        for (int s = 0; s < kNumStates; ++s)
            for (int l = 0; l < kNumLabels; ++l)
                gamma[k][s][l] = std::isfinite(peak) ? std::exp(logm[s][l] - peak) : 0.0;
    }
    return gamma;
}

struct DemodResult {
    LlrSeq llr;  ///< XOR a posteriori LLR per coded epoch
    JointApp app;
};

inline DemodResult demodulate(const CplxSeq& r, DetectionMode mode, const ChannelRealization* csi,
                              const PriorTable& prior, const ChannelParams& params, double lmax = kLlrMax) {
    params.validate();
    const MetricTable gamma = branch_metrics(r, mode, csi, prior, params);
    const ForwardBackward fb = forward_backward(gamma);
    DemodResult out;
    out.app = joint_app(fb, gamma);
    out.llr = xor_llr(out.app, lmax);
    return out;
}

inline DemodResult demodulate(const CplxSeq& r, DetectionMode mode, const std::optional<ChannelRealization>& csi,
                              const PriorTable& prior, const ChannelParams& params, double lmax = kLlrMax) {
    return demodulate(r, mode, csi ? &*csi : nullptr, prior, params, lmax);
}

}  // namespace turbodpsk
