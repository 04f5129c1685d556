#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "turbodpsk/rng.hpp"

namespace turbodpsk {

/// Frame permutation shared by both sources and the relay.
/// interleave: out[k] = in[perm[k]].
class Interleaver {
public:
    Interleaver() = default;
    explicit Interleaver(std::vector<int> perm) : perm_(std::move(perm)) {
        std::vector<char> seen(perm_.size(), 0);
        for (int p : perm_) {
            if (p < 0 || static_cast<std::size_t>(p) >= perm_.size() || seen[static_cast<std::size_t>(p)])
                throw std::invalid_argument("Interleaver: not a permutation");
            seen[static_cast<std::size_t>(p)] = 1;
        }
    }

    static Interleaver identity(std::size_t n) {
        std::vector<int> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(i);
        return Interleaver(std::move(p));
    }

    /// Fisher-Yates over mt19937_64(seed) with rejection sampling, so the
    /// permutation does not depend on the standard library's distributions.
    static Interleaver random(std::size_t n, std::uint64_t seed) {
        std::vector<int> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(i);
        Rng rng(seed);
        for (std::size_t i = n; i > 1; --i) {
            const std::uint64_t bound = i;
            const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
            std::uint64_t x;
            do x = rng();
            while (x >= limit);
            std::swap(p[i - 1], p[static_cast<std::size_t>(x % bound)]);
        }
        return Interleaver(std::move(p));
    }

    static Interleaver read(std::istream& in) {
        std::vector<int> p;
        long v;
        while (in >> v) p.push_back(static_cast<int>(v));
        if (!in.eof()) throw std::runtime_error("Interleaver: malformed permutation file");
        return Interleaver(std::move(p));
    }

    static Interleaver read_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("Interleaver: cannot open " + path);
        return read(f);
    }

    void write(std::ostream& out) const {
        for (int p : perm_) out << p << '\n';
    }

    std::size_t size() const { return perm_.size(); }
    const std::vector<int>& permutation() const { return perm_; }

    template <typename T>
    std::vector<T> interleave(const std::vector<T>& in) const {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[static_cast<std::size_t>(perm_[k])];
        return out;
    }

    template <typename T>
    std::vector<T> deinterleave(const std::vector<T>& in) const {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t k = 0; k < in.size(); ++k) out[static_cast<std::size_t>(perm_[k])] = in[k];
        return out;
    }

private:
    void check(std::size_t n) const {
        if (n != perm_.size()) throw std::invalid_argument("Interleaver: length mismatch");
    }

    std::vector<int> perm_;
};

}  // namespace turbodpsk
