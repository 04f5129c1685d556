#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace turbodpsk {

using cplx = std::complex<double>;
using CplxSeq = std::vector<cplx>;

/// LLR sequence. Convention throughout the library: L = log Pr(bit=1)/Pr(bit=0),
/// so a positive value favours a one.
using LlrSeq = std::vector<double>;

/// Magnitude at which every LLR is clamped before leaving a soft stage.
inline constexpr double kLlrMax = 50.0;

enum class BitRole { info, coded, xor_codeword };

struct BitSeq {
    std::vector<std::uint8_t> bits;
    BitRole role = BitRole::coded;

    BitSeq() = default;
    explicit BitSeq(std::vector<std::uint8_t> b, BitRole r = BitRole::coded)
        : bits(std::move(b)), role(r) {
        for (auto v : bits)
            if (v > 1) throw std::invalid_argument("BitSeq: element outside {0,1}");
    }

    std::size_t size() const { return bits.size(); }
    bool empty() const { return bits.empty(); }
    std::uint8_t operator[](std::size_t i) const { return bits[i]; }
    friend bool operator==(const BitSeq& a, const BitSeq& b) { return a.bits == b.bits; }
};

/// Complex baseband symbols, each of energy `energy`.
struct SymbolSeq {
    CplxSeq symbols;
    double energy = 1.0;

    std::size_t size() const { return symbols.size(); }
    const cplx& operator[](std::size_t i) const { return symbols[i]; }
};

/// Probability over the four label pairs (c1,c2), indexed 2*c1 + c2:
/// (0,0), (0,1), (1,0), (1,1).
using LabelProbs = std::array<double, 4>;

/// Per-epoch a posteriori label probabilities.
using JointApp = std::vector<LabelProbs>;

/// Per-epoch a priori label probabilities fed to the branch metric.
using PriorTable = std::vector<LabelProbs>;

inline PriorTable uniform_prior(std::size_t epochs) {
    return PriorTable(epochs, LabelProbs{0.25, 0.25, 0.25, 0.25});
}

inline double clamp_llr(double l, double lmax = kLlrMax) {
    if (l != l) return 0.0;
    return l > lmax ? lmax : (l < -lmax ? -lmax : l);
}

}  // namespace turbodpsk
