#pragma once

// Differential BPSK and the XOR network-code map.
//
// Bit-to-phase mapping: a coded bit 0 rotates the carrier by pi, a coded bit 1
// keeps the phase. This is the reverse of the usual DBPSK convention and is
// relied on by the joint trellis (next u = u_prev * (2c - 1)).

#include <cmath>
#include <stdexcept>

#include "turbodpsk/types.hpp"

namespace turbodpsk {

/// Reference symbol sent first by both sources.
inline constexpr int kReferenceSymbol = +1;

/// Maps coded bits c(0..N-1) onto N+1 symbols. Symbol 0 is the reference
/// sqrt(Es)*u0; bit c(k) drives the transition from symbol k to symbol k+1.
inline SymbolSeq differential_encode(const BitSeq& coded, int u0 = kReferenceSymbol, double es = 1.0) {
    if (coded.empty()) throw std::invalid_argument("differential_encode: empty input");
    if (u0 != 1 && u0 != -1) throw std::invalid_argument("differential_encode: u0 must be +1 or -1");
    if (!(es > 0.0)) throw std::invalid_argument("differential_encode: Es must be positive");

    const double amp = std::sqrt(es);
    SymbolSeq out;
    out.energy = es;
    out.symbols.resize(coded.size() + 1);
    int u = u0;
    out.symbols[0] = amp * u;
    for (std::size_t k = 0; k < coded.size(); ++k) {
        u *= 2 * static_cast<int>(coded[k]) - 1;
        out.symbols[k + 1] = amp * u;
    }
    return out;
}

/// Inverse of differential_encode for noiseless antipodal symbols.
inline BitSeq differential_decode_hard(const SymbolSeq& symbols) {
    if (symbols.size() < 2) throw std::invalid_argument("differential_decode_hard: need at least 2 symbols");
    const double amp = std::sqrt(symbols.energy);
    const double tol = 1e-9 * amp;
    std::vector<int> u(symbols.size());
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        const cplx s = symbols[k];
        if (std::abs(s.imag()) > tol || std::abs(std::abs(s.real()) - amp) > tol)
            throw std::invalid_argument("differential_decode_hard: symbol is not +-sqrt(Es)");
        u[k] = s.real() > 0 ? 1 : -1;
    }
    std::vector<std::uint8_t> bits(symbols.size() - 1);
    for (std::size_t k = 0; k + 1 < u.size(); ++k) bits[k] = u[k] == u[k + 1] ? 1 : 0;
    return BitSeq(std::move(bits), BitRole::coded);
}

inline BitSeq xor_reference(const BitSeq& c1, const BitSeq& c2) {
    if (c1.size() != c2.size()) throw std::invalid_argument("xor_reference: length mismatch");
    std::vector<std::uint8_t> out(c1.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = c1[k] ^ c2[k];
    return BitSeq(std::move(out), BitRole::xor_codeword);
}

}  // namespace turbodpsk
