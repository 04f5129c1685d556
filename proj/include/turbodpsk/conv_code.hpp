#pragma once

// Rate-1/2 feedforward convolutional code, zero-terminated, with an exact
// (log-sum-exp) BCJR soft-in soft-out decoder.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "turbodpsk/types.hpp"

namespace turbodpsk {

struct ConvSisoResult {
    LlrSeq coded_posterior;
    LlrSeq coded_extrinsic;  ///< coded_posterior - channel input
    LlrSeq info_posterior;
    BitSeq info_hard;
};

namespace detail {
inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
}
}  // namespace detail

class ConvCode {
public:
    /// Generators in octal as written, e.g. (023, 035); the most significant
    /// tap multiplies the current input bit.
    ConvCode(unsigned g0_octal, unsigned g1_octal, int memory, int info_length)
        : g_{g0_octal, g1_octal}, memory_(memory), info_length_(info_length) {
        if (memory < 1 || memory > 12) throw std::invalid_argument("ConvCode: unsupported memory");
        if (info_length < 1) throw std::invalid_argument("ConvCode: info length must be positive");
        const unsigned limit = 1u << (memory + 1);
        if (g0_octal >= limit || g1_octal >= limit) throw std::invalid_argument("ConvCode: generator wider than memory + 1");
        const int ns = num_states();
        next_.resize(static_cast<std::size_t>(ns));
        out_.resize(static_cast<std::size_t>(ns));
        for (int s = 0; s < ns; ++s)
            for (int u = 0; u < 2; ++u) {
                const unsigned reg = (static_cast<unsigned>(u) << memory_) | static_cast<unsigned>(s);
                next_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] = static_cast<int>(reg >> 1);
                out_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] = {
                    static_cast<std::uint8_t>(std::popcount(reg & g_[0]) & 1),
                    static_cast<std::uint8_t>(std::popcount(reg & g_[1]) & 1)};
            }
    }

    /// The (23,35) octal, memory-4 code.
    static ConvCode standard(int info_length = 504) { return ConvCode(023, 035, 4, info_length); }

    int num_states() const { return 1 << memory_; }
    int memory() const { return memory_; }
    int info_length() const { return info_length_; }
    int length() const { return 2 * (info_length_ + memory_); }
    double rate() const { return static_cast<double>(info_length_) / length(); }

    BitSeq encode(const BitSeq& info) const {
        if (static_cast<int>(info.size()) != info_length_) throw std::invalid_argument("conv_encode: wrong info length");
        std::vector<std::uint8_t> out;
        out.reserve(static_cast<std::size_t>(length()));
        int s = 0;
        for (int k = 0; k < info_length_ + memory_; ++k) {
            const int u = k < info_length_ ? info[static_cast<std::size_t>(k)] : 0;
            const auto& o = out_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
            out.push_back(o[0]);
            out.push_back(o[1]);
            s = next_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
        }
        return BitSeq(std::move(out), BitRole::coded);
    }

    /// True if some input sequence ending in the zero state produces `c`.
    bool is_codeword(const BitSeq& c) const {
        if (static_cast<int>(c.size()) != length()) return false;
        // Track every state consistent with the observed pairs.
        std::vector<char> alive(static_cast<std::size_t>(num_states()), 0);
        alive[0] = 1;
        for (int k = 0; k < info_length_ + memory_; ++k) {
            std::vector<char> nxt(alive.size(), 0);
            const std::uint8_t a = c[static_cast<std::size_t>(2 * k)], b = c[static_cast<std::size_t>(2 * k + 1)];
            for (int s = 0; s < num_states(); ++s) {
                if (!alive[static_cast<std::size_t>(s)]) continue;
                for (int u = 0; u < (k < info_length_ ? 2 : 1); ++u) {
                    const auto& o = out_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
                    if (o[0] == a && o[1] == b) nxt[static_cast<std::size_t>(next_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)])] = 1;
                }
            }
            alive = std::move(nxt);
        }
        return alive[0] != 0;
    }

    /// Symbol-wise MAP over the terminated trellis. `channel_llr` has length()
    /// entries, `info_prior` info_length() entries (empty means uniform).
    ConvSisoResult siso(const LlrSeq& channel_llr, const LlrSeq& info_prior = {}, double lmax = kLlrMax) const {
        const int steps = info_length_ + memory_;
        const int ns = num_states();
        if (static_cast<int>(channel_llr.size()) != length()) throw std::invalid_argument("conv_bcjr_siso: wrong channel LLR length");
        if (!info_prior.empty() && static_cast<int>(info_prior.size()) != info_length_)
            throw std::invalid_argument("conv_bcjr_siso: wrong prior length");
        constexpr double kNegInf = -std::numeric_limits<double>::infinity();

        // log P(bit) up to a per-bit constant: +L/2 for one, -L/2 for zero
        auto bitlog = [](double llr, int b) { return b ? 0.5 * llr : -0.5 * llr; };
        auto gamma = [&](int k, int s, int u) {
            const auto& o = out_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
            double g = bitlog(channel_llr[static_cast<std::size_t>(2 * k)], o[0]) +
                       bitlog(channel_llr[static_cast<std::size_t>(2 * k + 1)], o[1]);
            if (k < info_length_ && !info_prior.empty()) g += bitlog(info_prior[static_cast<std::size_t>(k)], u);
            return g;
        };

        const std::size_t stride = static_cast<std::size_t>(ns);
        std::vector<double> alpha((static_cast<std::size_t>(steps) + 1) * stride, kNegInf);
        std::vector<double> beta((static_cast<std::size_t>(steps) + 1) * stride, kNegInf);
        alpha[0] = 0.0;
        for (int k = 0; k < steps; ++k) {
            const int umax = k < info_length_ ? 2 : 1;
            double* an = &alpha[(static_cast<std::size_t>(k) + 1) * stride];
            const double* ac = &alpha[static_cast<std::size_t>(k) * stride];
            for (int s = 0; s < ns; ++s) {
                if (ac[s] == kNegInf) continue;
                for (int u = 0; u < umax; ++u) {
                    const int t = next_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
                    an[t] = detail::log_add(an[t], ac[s] + gamma(k, s, u));
                }
            }
            const double mx = *std::max_element(an, an + ns);
            for (int s = 0; s < ns; ++s)
                if (an[s] != kNegInf) an[s] -= mx;
        }
        beta[static_cast<std::size_t>(steps) * stride] = 0.0;  // terminated in state 0
        for (int k = steps; k-- > 0;) {
            const int umax = k < info_length_ ? 2 : 1;
            double* bc = &beta[static_cast<std::size_t>(k) * stride];
            const double* bn = &beta[(static_cast<std::size_t>(k) + 1) * stride];
            for (int s = 0; s < ns; ++s)
                for (int u = 0; u < umax; ++u) {
                    const int t = next_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
                    if (bn[t] == kNegInf) continue;
                    bc[s] = detail::log_add(bc[s], bn[t] + gamma(k, s, u));
                }
            const double mx = *std::max_element(bc, bc + ns);
            for (int s = 0; s < ns; ++s)
                if (bc[s] != kNegInf) bc[s] -= mx;
        }

        ConvSisoResult res;
        res.coded_posterior.resize(static_cast<std::size_t>(length()));
        res.coded_extrinsic.resize(static_cast<std::size_t>(length()));
        res.info_posterior.resize(static_cast<std::size_t>(info_length_));
        std::vector<std::uint8_t> hard(static_cast<std::size_t>(info_length_));
        for (int k = 0; k < steps; ++k) {
            const int umax = k < info_length_ ? 2 : 1;
            std::array<double, 2> pu{kNegInf, kNegInf}, p0{kNegInf, kNegInf}, p1{kNegInf, kNegInf};
            const double* ac = &alpha[static_cast<std::size_t>(k) * stride];
            const double* bn = &beta[(static_cast<std::size_t>(k) + 1) * stride];
            for (int s = 0; s < ns; ++s) {
                if (ac[s] == kNegInf) continue;
                for (int u = 0; u < umax; ++u) {
                    const int t = next_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
                    if (bn[t] == kNegInf) continue;
                    const double m = ac[s] + gamma(k, s, u) + bn[t];
                    const auto& o = out_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
                    pu[static_cast<std::size_t>(u)] = detail::log_add(pu[static_cast<std::size_t>(u)], m);
                    p0[o[0]] = detail::log_add(p0[o[0]], m);
                    p1[o[1]] = detail::log_add(p1[o[1]], m);
                }
            }
            auto ratio = [&](const std::array<double, 2>& p) {
                if (p[1] == kNegInf) return -lmax;
                if (p[0] == kNegInf) return lmax;
                return clamp_llr(p[1] - p[0], lmax);
            };
            const auto i0 = static_cast<std::size_t>(2 * k), i1 = i0 + 1;
            res.coded_posterior[i0] = ratio(p0);
            res.coded_posterior[i1] = ratio(p1);
            res.coded_extrinsic[i0] = clamp_llr(res.coded_posterior[i0] - channel_llr[i0], lmax);
            res.coded_extrinsic[i1] = clamp_llr(res.coded_posterior[i1] - channel_llr[i1], lmax);
            if (k < info_length_) {
                res.info_posterior[static_cast<std::size_t>(k)] = ratio(pu);
                hard[static_cast<std::size_t>(k)] = res.info_posterior[static_cast<std::size_t>(k)] > 0.0 ? 1 : 0;
            }
        }
        res.info_hard = BitSeq(std::move(hard), BitRole::info);
        return res;
    }

private:
    std::array<unsigned, 2> g_;
    int memory_;
    int info_length_;
    std::vector<std::array<int, 2>> next_;
    std::vector<std::array<std::array<std::uint8_t, 2>, 2>> out_;
};

}  // namespace turbodpsk
