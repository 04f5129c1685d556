#pragma once

// Iterative relay receiver: joint DBPSK demodulator <-> outer SISO decoder
// working on the XOR codeword c1 ^ c2, which is a codeword of the shared
// linear code.

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "turbodpsk/conv_code.hpp"
#include "turbodpsk/interleaver.hpp"
#include "turbodpsk/joint_trellis.hpp"
#include "turbodpsk/ldpc.hpp"

namespace turbodpsk {

enum class OuterCodeKind { ldpc, conv };

struct OuterDecodeResult {
    LlrSeq extrinsic;       ///< per coded bit, decoder output minus decoder input
    BitSeq codeword;        ///< hard codeword decision
    bool converged = false;
};

/// Either outer code behind one interface. Code objects are immutable and
/// may be shared between receivers running on different threads.
class OuterCodec {
public:
    explicit OuterCodec(std::shared_ptr<const LdpcCode> code, int max_iter = 20)
        : ldpc_(std::move(code)), ldpc_iters_(max_iter) {}
    explicit OuterCodec(std::shared_ptr<const ConvCode> code) : conv_(std::move(code)) {}

    OuterCodeKind kind() const { return ldpc_ ? OuterCodeKind::ldpc : OuterCodeKind::conv; }
    int length() const { return ldpc_ ? ldpc_->length() : conv_->length(); }
    int info_length() const { return ldpc_ ? ldpc_->info_length() : conv_->info_length(); }
    double rate() const { return ldpc_ ? ldpc_->rate() : conv_->rate(); }
    const LdpcCode* ldpc() const { return ldpc_.get(); }
    const ConvCode* conv() const { return conv_.get(); }

    BitSeq encode(const BitSeq& info) const { return ldpc_ ? ldpc_->encode(info) : conv_->encode(info); }
    bool is_codeword(const BitSeq& c) const { return ldpc_ ? ldpc_->is_codeword(c) : conv_->is_codeword(c); }

    OuterDecodeResult decode(const LlrSeq& llr, double lmax = kLlrMax) const {
        OuterDecodeResult out;
        if (ldpc_) {
            SpaResult r = ldpc_->decode(llr, ldpc_iters_, lmax);
            out.extrinsic = std::move(r.extrinsic);
            out.codeword = std::move(r.hard);
            out.converged = r.converged;
        } else {
            ConvSisoResult r = conv_->siso(llr, {}, lmax);
            out.extrinsic = std::move(r.coded_extrinsic);
            out.codeword = conv_->encode(r.info_hard);
            out.converged = true;
        }
        return out;
    }

private:
    std::shared_ptr<const LdpcCode> ldpc_;
    std::shared_ptr<const ConvCode> conv_;
    int ldpc_iters_ = 20;
};

/// What the demodulator hands to the outer decoder.
enum class DemodOutput {
    extrinsic,  ///< XOR APP LLR minus the XOR prior the demodulator was given
    app,        ///< the full XOR APP LLR
};

struct TurboConfig {
    int num_iterations = 3;
    DetectionMode mode = DetectionMode::coherent;
    DemodOutput demod_output = DemodOutput::app;
    double llr_max = kLlrMax;
    bool early_exit = true;

    static int default_iterations(DetectionMode m) { return m == DetectionMode::coherent ? 3 : 2; }
};

struct IterationStats {
    long xor_bit_errors = -1;  ///< -1 when no reference was given
    bool decoder_converged = false;
    double mean_abs_extrinsic = 0.0;
    bool early_exit_copy = false;  ///< filled from the previous iteration after early exit
};

using IterationTrace = std::vector<IterationStats>;

struct RelayResult {
    BitSeq decision;  ///< hard decision on c_R (codeword order, deinterleaved)
    IterationTrace trace;
};

/// Equal-split prior: P(0,0) = P(1,1) ~ exp(-Le/2), P(0,1) = P(1,0) ~ exp(+Le/2).
inline LabelProbs split_extrinsic(double le) {
    // exp(+-le/2) / (2 exp(le/2) + 2 exp(-le/2)) written through the logistic
    const double p_one = 1.0 / (1.0 + std::exp(-le));  // P(XOR = 1)
    const double p_zero = 1.0 / (1.0 + std::exp(le));
    return {p_zero / 2.0, p_one / 2.0, p_one / 2.0, p_zero / 2.0};
}

inline PriorTable split_extrinsic(const LlrSeq& le) {
    PriorTable out(le.size());
    for (std::size_t k = 0; k < le.size(); ++k) out[k] = split_extrinsic(le[k]);
    return out;
}

inline long count_bit_errors(const BitSeq& a, const BitSeq& b) {
    if (a.size() != b.size()) throw std::invalid_argument("count_bit_errors: length mismatch");
    long e = 0;
    for (std::size_t k = 0; k < a.size(); ++k) e += a[k] != b[k];
    return e;
}

/// Runs the demodulate / decode loop for one frame. `r` holds the N+1
/// observations (reference symbol first); `reference`, when given, is the
/// true c1 ^ c2 in codeword order and is only used for the trace.
inline RelayResult relay_receive(const CplxSeq& r, const TurboConfig& cfg, const OuterCodec& codec,
                                 const Interleaver& pi, const ChannelRealization* csi, const ChannelParams& params,
                                 const BitSeq* reference = nullptr) {
    if (cfg.num_iterations < 1) throw std::invalid_argument("relay_receive: iterations must be >= 1");
    const auto n = static_cast<std::size_t>(codec.length());
    if (r.size() != n + 1) throw std::invalid_argument("relay_receive: observation length must be code length + 1");
    if (pi.size() != n) throw std::invalid_argument("relay_receive: interleaver length mismatch");
    if (reference && reference->size() != n) throw std::invalid_argument("relay_receive: reference length mismatch");

    RelayResult res;
    res.trace.reserve(static_cast<std::size_t>(cfg.num_iterations));
    PriorTable prior = uniform_prior(n);
    LlrSeq prior_llr(n, 0.0);  // interleaved order
    BitSeq previous;

    for (int it = 0; it < cfg.num_iterations; ++it) {
        const DemodResult dm = demodulate(r, cfg.mode, csi, prior, params, cfg.llr_max);
        LlrSeq to_decoder = dm.llr;
        if (cfg.demod_output == DemodOutput::extrinsic)
            for (std::size_t k = 0; k < n; ++k) to_decoder[k] = clamp_llr(dm.llr[k] - prior_llr[k], cfg.llr_max);

        const OuterDecodeResult dec = codec.decode(pi.deinterleave(to_decoder), cfg.llr_max);

        IterationStats st;
        st.decoder_converged = dec.converged;
        double acc = 0.0;
        for (double v : dec.extrinsic) acc += std::abs(v);
        st.mean_abs_extrinsic = acc / static_cast<double>(n);
        if (reference) st.xor_bit_errors = count_bit_errors(dec.codeword, *reference);
        res.trace.push_back(st);

        const bool stable = dec.converged && !previous.empty() && previous == dec.codeword;
        previous = dec.codeword;
        res.decision = dec.codeword;
        if (cfg.early_exit && stable) break;

        prior_llr = pi.interleave(dec.extrinsic);
        prior = split_extrinsic(prior_llr);
    }
    while (static_cast<int>(res.trace.size()) < cfg.num_iterations) {
        IterationStats copy = res.trace.back();
        copy.early_exit_copy = true;
        res.trace.push_back(copy);
    }
    return res;
}

inline RelayResult relay_receive(const CplxSeq& r, const TurboConfig& cfg, const OuterCodec& codec,
                                 const Interleaver& pi, const std::optional<ChannelRealization>& csi,
                                 const ChannelParams& params, const std::optional<BitSeq>& reference = std::nullopt) {
    return relay_receive(r, cfg, codec, pi, csi ? &*csi : nullptr, params, reference ? &*reference : nullptr);
}

}  // namespace turbodpsk
