#pragma once

// Regular LDPC codes: alist I/O, progressive-edge-growth construction,
// GF(2) systematic encoder and the sum-product decoder.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "turbodpsk/rng.hpp"
#include "turbodpsk/types.hpp"

namespace turbodpsk {

/// Sparse binary matrix kept as adjacency lists both ways (0-based).
struct SparseBinaryMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<int>> row_cols;  ///< column indices of the ones in each row
    std::vector<std::vector<int>> col_rows;  ///< row indices of the ones in each column

    static SparseBinaryMatrix from_rows(int rows, int cols, std::vector<std::vector<int>> row_cols) {
        SparseBinaryMatrix m;
        m.rows = rows;
        m.cols = cols;
        m.row_cols = std::move(row_cols);
        m.col_rows.assign(static_cast<std::size_t>(cols), {});
        for (int r = 0; r < rows; ++r) {
            auto& rc = m.row_cols[static_cast<std::size_t>(r)];
            std::sort(rc.begin(), rc.end());
            if (std::adjacent_find(rc.begin(), rc.end()) != rc.end())
                throw std::invalid_argument("SparseBinaryMatrix: duplicate entry in row " + std::to_string(r));
            for (int c : rc) {
                if (c < 0 || c >= cols) throw std::invalid_argument("SparseBinaryMatrix: column index out of range");
                m.col_rows[static_cast<std::size_t>(c)].push_back(r);
            }
        }
        return m;
    }

    std::size_t num_edges() const {
        std::size_t e = 0;
        for (const auto& r : row_cols) e += r.size();
        return e;
    }
};

// ---------------------------------------------------------------------------
// alist format (MacKay): 1-based indices, zero padding allowed.
//   cols rows
//   max_col_weight max_row_weight
//   <col weights>
//   <row weights>
//   <one line per column: row indices>
//   <one line per row: column indices>

inline SparseBinaryMatrix read_alist(std::istream& in) {
    auto need = [&](const char* what) {
        long v;
        if (!(in >> v)) throw std::runtime_error(std::string("alist: malformed file, expected ") + what);
        return v;
    };
    const long n = need("column count");
    const long m = need("row count");
    if (n <= 0 || m <= 0 || n > 1'000'000 || m > 1'000'000) throw std::runtime_error("alist: bad dimensions");
    const long max_cw = need("max column weight");
    const long max_rw = need("max row weight");
    std::vector<long> cw(static_cast<std::size_t>(n)), rw(static_cast<std::size_t>(m));
    for (auto& w : cw) w = need("column weight");
    for (auto& w : rw) w = need("row weight");

    std::vector<std::vector<int>> col_lists(static_cast<std::size_t>(n));
    for (long c = 0; c < n; ++c)
        for (long j = 0; j < max_cw; ++j) {
            const long v = need("column entry");
            if (v == 0) continue;
            if (v < 1 || v > m) throw std::runtime_error("alist: row index out of range");
            col_lists[static_cast<std::size_t>(c)].push_back(static_cast<int>(v - 1));
        }
    std::vector<std::vector<int>> row_lists(static_cast<std::size_t>(m));
    for (long r = 0; r < m; ++r)
        for (long j = 0; j < max_rw; ++j) {
            const long v = need("row entry");
            if (v == 0) continue;
            if (v < 1 || v > n) throw std::runtime_error("alist: column index out of range");
            row_lists[static_cast<std::size_t>(r)].push_back(static_cast<int>(v - 1));
        }

    for (long c = 0; c < n; ++c)
        if (static_cast<long>(col_lists[static_cast<std::size_t>(c)].size()) != cw[static_cast<std::size_t>(c)])
            throw std::runtime_error("alist: column " + std::to_string(c + 1) + " weight disagrees with header");
    for (long r = 0; r < m; ++r)
        if (static_cast<long>(row_lists[static_cast<std::size_t>(r)].size()) != rw[static_cast<std::size_t>(r)])
            throw std::runtime_error("alist: row " + std::to_string(r + 1) + " weight disagrees with header");

    auto h = SparseBinaryMatrix::from_rows(static_cast<int>(m), static_cast<int>(n), std::move(row_lists));
    for (long c = 0; c < n; ++c) {
        auto a = col_lists[static_cast<std::size_t>(c)];
        std::sort(a.begin(), a.end());
        if (a != h.col_rows[static_cast<std::size_t>(c)])
            throw std::runtime_error("alist: column and row lists disagree at column " + std::to_string(c + 1));
    }
    return h;
}

inline SparseBinaryMatrix read_alist_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("alist: cannot open " + path);
    return read_alist(f);
}

inline void write_alist(std::ostream& out, const SparseBinaryMatrix& h) {
    std::size_t max_cw = 0, max_rw = 0;
    for (const auto& c : h.col_rows) max_cw = std::max(max_cw, c.size());
    for (const auto& r : h.row_cols) max_rw = std::max(max_rw, r.size());
    out << h.cols << ' ' << h.rows << '\n' << max_cw << ' ' << max_rw << '\n';
    auto line = [&](const std::vector<int>& v, std::size_t width) {
        for (std::size_t j = 0; j < width; ++j) {
            if (j) out << ' ';
            out << (j < v.size() ? v[j] + 1 : 0);
        }
        out << '\n';
    };
    for (std::size_t c = 0; c < h.col_rows.size(); ++c) out << h.col_rows[c].size() << (c + 1 < h.col_rows.size() ? " " : "\n");
    for (std::size_t r = 0; r < h.row_cols.size(); ++r) out << h.row_cols[r].size() << (r + 1 < h.row_cols.size() ? " " : "\n");
    for (const auto& c : h.col_rows) line(c, max_cw);
    for (const auto& r : h.row_cols) line(r, max_rw);
}

// ---------------------------------------------------------------------------
// Structural checks

/// True when no two rows share more than one column (no length-4 cycles).
inline bool has_girth_at_least_6(const SparseBinaryMatrix& h) {
    std::vector<int> seen(static_cast<std::size_t>(h.rows), -1);
    for (int r = 0; r < h.rows; ++r) {
        // rows sharing a column with r; a second hit means a 4-cycle
        std::vector<int> touched;
        for (int c : h.row_cols[static_cast<std::size_t>(r)])
            for (int r2 : h.col_rows[static_cast<std::size_t>(c)]) {
                if (r2 == r) continue;
                if (seen[static_cast<std::size_t>(r2)] == r) return false;
                seen[static_cast<std::size_t>(r2)] = r;
            }
    }
    return true;
}

/// Dense GF(2) row with 64-bit words.
struct Gf2Row {
    std::vector<std::uint64_t> w;
    explicit Gf2Row(std::size_t bits = 0) : w((bits + 63) / 64, 0) {}
    bool get(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void flip(std::size_t i) { w[i >> 6] ^= std::uint64_t{1} << (i & 63); }
    Gf2Row& operator^=(const Gf2Row& o) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] ^= o.w[i];
        return *this;
    }
};

struct Gf2Echelon {
    std::vector<Gf2Row> rows;      ///< reduced rows, one per pivot
    std::vector<int> pivot_cols;   ///< pivot column of each reduced row
    std::vector<int> free_cols;    ///< non-pivot columns, ascending
    int rank() const { return static_cast<int>(pivot_cols.size()); }
};

/// Reduced row echelon form of H over GF(2).
inline Gf2Echelon gf2_reduce(const SparseBinaryMatrix& h) {
    const auto n = static_cast<std::size_t>(h.cols);
    std::vector<Gf2Row> a;
    a.reserve(static_cast<std::size_t>(h.rows));
    for (const auto& rc : h.row_cols) {
        Gf2Row row(n);
        for (int c : rc) row.set(static_cast<std::size_t>(c));
        a.push_back(std::move(row));
    }
    Gf2Echelon e;
    std::size_t r = 0;
    std::vector<bool> is_pivot(n, false);
    for (std::size_t c = 0; c < n && r < a.size(); ++c) {
        std::size_t p = r;
        while (p < a.size() && !a[p].get(c)) ++p;
        if (p == a.size()) continue;
        std::swap(a[r], a[p]);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (i != r && a[i].get(c)) a[i] ^= a[r];
        e.pivot_cols.push_back(static_cast<int>(c));
        is_pivot[c] = true;
        ++r;
    }
    a.resize(r);
    e.rows = std::move(a);
    for (std::size_t c = 0; c < n; ++c)
        if (!is_pivot[c]) e.free_cols.push_back(static_cast<int>(c));
    return e;
}

inline int gf2_rank(const SparseBinaryMatrix& h) { return gf2_reduce(h).rank(); }

// ---------------------------------------------------------------------------
// Progressive edge growth for a (column weight, row weight) regular matrix.

inline SparseBinaryMatrix peg_construct(int n, int m, int col_weight, std::uint64_t seed) {
    if (n <= 0 || m <= 0 || col_weight <= 0) throw std::invalid_argument("peg_construct: bad dimensions");
    if ((static_cast<long>(n) * col_weight) % m != 0) throw std::invalid_argument("peg_construct: not regular");
    const int row_weight = static_cast<int>(static_cast<long>(n) * col_weight / m);

    Rng rng(seed);
    std::vector<std::vector<int>> vrows(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> cvars(static_cast<std::size_t>(m));

    auto pick = [&](const std::vector<int>& cands) {
        // lowest current degree, ties broken at random
        std::size_t best_deg = std::numeric_limits<std::size_t>::max();
        std::vector<int> best;
        for (int c : cands) {
            const std::size_t d = cvars[static_cast<std::size_t>(c)].size();
            if (static_cast<int>(d) >= row_weight) continue;
            if (d < best_deg) {
                best_deg = d;
                best.assign(1, c);
            } else if (d == best_deg) {
                best.push_back(c);
            }
        }
        if (best.empty()) return -1;
        return best[rng() % best.size()];
    };

    std::vector<int> all_checks(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) all_checks[static_cast<std::size_t>(i)] = i;

    for (int v = 0; v < n; ++v) {
        for (int e = 0; e < col_weight; ++e) {
            int chosen;
            if (e == 0) {
                chosen = pick(all_checks);
            } else {
                // BFS from v over the current graph; collect checks not reached
                std::vector<int> cdepth(static_cast<std::size_t>(m), -1);
                std::vector<char> vseen(static_cast<std::size_t>(n), 0);
                std::vector<int> frontier{v};
                vseen[static_cast<std::size_t>(v)] = 1;
                std::vector<int> last_unreached;
                int depth = 0;
                std::size_t reached = 0;
                while (true) {
                    std::vector<int> new_checks;
                    for (int x : frontier)
                        for (int c : vrows[static_cast<std::size_t>(x)])
                            if (cdepth[static_cast<std::size_t>(c)] < 0) {
                                cdepth[static_cast<std::size_t>(c)] = depth;
                                new_checks.push_back(c);
                            }
                    // unreached checks that still have room
                    std::vector<int> unreached;
                    for (int c = 0; c < m; ++c)
                        if (cdepth[static_cast<std::size_t>(c)] < 0 &&
                            static_cast<int>(cvars[static_cast<std::size_t>(c)].size()) < row_weight)
                            unreached.push_back(c);
                    if (unreached.empty() || new_checks.empty() || reached == static_cast<std::size_t>(m)) {
                        if (unreached.empty()) {
                            // every open check already reachable: take the deepest layer
                            std::vector<int> deepest;
                            int dmax = -1;
                            for (int c = 0; c < m; ++c) {
                                if (static_cast<int>(cvars[static_cast<std::size_t>(c)].size()) >= row_weight) continue;
                                if (std::find(vrows[static_cast<std::size_t>(v)].begin(),
                                              vrows[static_cast<std::size_t>(v)].end(), c) !=
                                    vrows[static_cast<std::size_t>(v)].end())
                                    continue;
                                const int d = cdepth[static_cast<std::size_t>(c)];
                                if (d > dmax) {
                                    dmax = d;
                                    deepest.assign(1, c);
                                } else if (d == dmax) {
                                    deepest.push_back(c);
                                }
                            }
                            last_unreached = deepest;
                        } else {
                            last_unreached = unreached;
                        }
                        break;
                    }
                    reached += new_checks.size();
                    last_unreached = unreached;
                    std::vector<int> next_vars;
                    for (int c : new_checks)
                        for (int x : cvars[static_cast<std::size_t>(c)])
                            if (!vseen[static_cast<std::size_t>(x)]) {
                                vseen[static_cast<std::size_t>(x)] = 1;
                                next_vars.push_back(x);
                            }
                    frontier = std::move(next_vars);
                    ++depth;
                }
                chosen = pick(last_unreached);
            }
            if (chosen < 0) throw std::runtime_error("peg_construct: ran out of open checks");
            vrows[static_cast<std::size_t>(v)].push_back(chosen);
            cvars[static_cast<std::size_t>(chosen)].push_back(v);
        }
    }
    return SparseBinaryMatrix::from_rows(m, n, std::move(cvars));
}

// ---------------------------------------------------------------------------

struct SpaResult {
    LlrSeq posterior;
    LlrSeq extrinsic;  ///< posterior - channel input
    BitSeq hard;
    bool converged = false;
    int iterations = 0;
};

/// LDPC code with a systematic GF(2) encoder. Info bits occupy the non-pivot
/// columns of the reduced parity-check matrix; if the matrix is rank deficient
/// the surplus free columns are held at zero so the info length stays fixed.
class LdpcCode {
public:
    LdpcCode(SparseBinaryMatrix h, int info_length, int expect_col_weight = 0, int expect_row_weight = 0)
        : h_(std::move(h)), info_length_(info_length) {
        if (expect_col_weight > 0)
            for (int c = 0; c < h_.cols; ++c)
                if (static_cast<int>(h_.col_rows[static_cast<std::size_t>(c)].size()) != expect_col_weight)
                    throw std::runtime_error("LdpcCode: column " + std::to_string(c) + " has wrong weight");
        if (expect_row_weight > 0)
            for (int r = 0; r < h_.rows; ++r)
                if (static_cast<int>(h_.row_cols[static_cast<std::size_t>(r)].size()) != expect_row_weight)
                    throw std::runtime_error("LdpcCode: row " + std::to_string(r) + " has wrong weight");
        ech_ = gf2_reduce(h_);
        if (static_cast<int>(ech_.free_cols.size()) < info_length_)
            throw std::runtime_error("LdpcCode: code dimension smaller than requested info length");
        info_cols_.assign(ech_.free_cols.begin(), ech_.free_cols.begin() + info_length_);

        // each pivot bit is the parity of the info bits it touches
        parity_masks_.reserve(ech_.rows.size());
        for (const auto& row : ech_.rows) {
            Gf2Row mask(static_cast<std::size_t>(info_length_));
            for (int j = 0; j < info_length_; ++j)
                if (row.get(static_cast<std::size_t>(info_cols_[static_cast<std::size_t>(j)]))) mask.set(static_cast<std::size_t>(j));
            parity_masks_.push_back(std::move(mask));
        }

        // edge layout for the decoder: edges grouped by check
        check_start_.assign(static_cast<std::size_t>(h_.rows) + 1, 0);
        for (int r = 0; r < h_.rows; ++r)
            check_start_[static_cast<std::size_t>(r) + 1] =
                check_start_[static_cast<std::size_t>(r)] + static_cast<int>(h_.row_cols[static_cast<std::size_t>(r)].size());
        edge_var_.resize(static_cast<std::size_t>(check_start_.back()));
        for (int r = 0; r < h_.rows; ++r)
            for (std::size_t j = 0; j < h_.row_cols[static_cast<std::size_t>(r)].size(); ++j)
                edge_var_[static_cast<std::size_t>(check_start_[static_cast<std::size_t>(r)]) + j] =
                    h_.row_cols[static_cast<std::size_t>(r)][j];
    }

    static LdpcCode from_alist(const std::string& path, int info_length, int col_weight = 0, int row_weight = 0) {
        return LdpcCode(read_alist_file(path), info_length, col_weight, row_weight);
    }

    const SparseBinaryMatrix& parity_check() const { return h_; }
    int length() const { return h_.cols; }
    int info_length() const { return info_length_; }
    int rank() const { return ech_.rank(); }
    double rate() const { return static_cast<double>(info_length_) / h_.cols; }
    const std::vector<int>& info_positions() const { return info_cols_; }

    BitSeq encode(const BitSeq& info) const {
        if (static_cast<int>(info.size()) != info_length_) throw std::invalid_argument("ldpc_encode: wrong info length");
        std::vector<std::uint8_t> c(static_cast<std::size_t>(h_.cols), 0);
        Gf2Row packed(static_cast<std::size_t>(info_length_));
        for (int j = 0; j < info_length_; ++j)
            if (info[static_cast<std::size_t>(j)]) {
                packed.set(static_cast<std::size_t>(j));
                c[static_cast<std::size_t>(info_cols_[static_cast<std::size_t>(j)])] = 1;
            }
        for (std::size_t i = 0; i < parity_masks_.size(); ++i) {
            unsigned acc = 0;
            for (std::size_t w = 0; w < packed.w.size(); ++w)
                acc += static_cast<unsigned>(std::popcount(packed.w[w] & parity_masks_[i].w[w]));
            c[static_cast<std::size_t>(ech_.pivot_cols[i])] = static_cast<std::uint8_t>(acc & 1u);
        }
        return BitSeq(std::move(c), BitRole::coded);
    }

    /// Systematic info bits of a codeword.
    BitSeq extract_info(const BitSeq& codeword) const {
        std::vector<std::uint8_t> d(static_cast<std::size_t>(info_length_));
        for (int j = 0; j < info_length_; ++j) d[static_cast<std::size_t>(j)] = codeword[static_cast<std::size_t>(info_cols_[static_cast<std::size_t>(j)])];
        return BitSeq(std::move(d), BitRole::info);
    }

    bool is_codeword(const BitSeq& c) const {
        if (static_cast<int>(c.size()) != h_.cols) return false;
        for (const auto& row : h_.row_cols) {
            unsigned s = 0;
            for (int v : row) s ^= c[static_cast<std::size_t>(v)];
            if (s) return false;
        }
        return true;
    }

    /// Flooding sum-product decoding. LLRs in and out use L = log P(1)/P(0).
    SpaResult decode(const LlrSeq& channel_llr, int max_iter = 20, double lmax = kLlrMax) const {
        const auto n = static_cast<std::size_t>(h_.cols);
        if (channel_llr.size() != n) throw std::invalid_argument("ldpc_spa_decode: wrong LLR length");
        const std::size_t edges = edge_var_.size();

        // internally log P(0)/P(1)
        std::vector<double> lam(n);
        for (std::size_t v = 0; v < n; ++v) lam[v] = -channel_llr[v];
        std::vector<double> v2c(edges), c2v(edges, 0.0), total(lam);
        for (std::size_t e = 0; e < edges; ++e) v2c[e] = lam[static_cast<std::size_t>(edge_var_[e])];

        SpaResult res;
        std::vector<std::uint8_t> hard(n, 0);
        std::vector<double> t(32), fwd(33), bwd(33);
        constexpr double kTanhCap = 1.0 - 1e-15;
        for (int it = 1; it <= max_iter; ++it) {
            for (int r = 0; r < h_.rows; ++r) {
                const int b = check_start_[static_cast<std::size_t>(r)];
                const int deg = check_start_[static_cast<std::size_t>(r) + 1] - b;
                if (static_cast<std::size_t>(deg) + 1 > fwd.size()) {
                    t.resize(static_cast<std::size_t>(deg));
                    fwd.resize(static_cast<std::size_t>(deg) + 1);
                    bwd.resize(static_cast<std::size_t>(deg) + 1);
                }
                for (int j = 0; j < deg; ++j) t[static_cast<std::size_t>(j)] = std::tanh(0.5 * v2c[static_cast<std::size_t>(b + j)]);
                fwd[0] = 1.0;
                for (int j = 0; j < deg; ++j) fwd[static_cast<std::size_t>(j) + 1] = fwd[static_cast<std::size_t>(j)] * t[static_cast<std::size_t>(j)];
                bwd[static_cast<std::size_t>(deg)] = 1.0;
                for (int j = deg; j-- > 0;) bwd[static_cast<std::size_t>(j)] = bwd[static_cast<std::size_t>(j) + 1] * t[static_cast<std::size_t>(j)];
                for (int j = 0; j < deg; ++j) {
                    double p = fwd[static_cast<std::size_t>(j)] * bwd[static_cast<std::size_t>(j) + 1];
                    p = std::clamp(p, -kTanhCap, kTanhCap);
                    c2v[static_cast<std::size_t>(b + j)] = 2.0 * std::atanh(p);
                }
            }
            total = lam;
            for (std::size_t e = 0; e < edges; ++e) total[static_cast<std::size_t>(edge_var_[e])] += c2v[e];
            for (std::size_t e = 0; e < edges; ++e) v2c[e] = total[static_cast<std::size_t>(edge_var_[e])] - c2v[e];

            bool undecided = false;
            for (std::size_t v = 0; v < n; ++v) {
                hard[v] = total[v] < 0.0 ? 1 : 0;
                undecided |= total[v] == 0.0;
            }
            res.iterations = it;
            // An exactly-zero posterior is no decision at all.
            if (!undecided && syndrome_zero(hard)) {
                res.converged = true;
                break;
            }
        }

        res.posterior.resize(n);
        res.extrinsic.resize(n);
        for (std::size_t v = 0; v < n; ++v) {
            res.posterior[v] = clamp_llr(-total[v], lmax);
            res.extrinsic[v] = clamp_llr(-total[v] - channel_llr[v], lmax);
        }
        res.hard = BitSeq(std::move(hard), BitRole::coded);
        return res;
    }

private:
    bool syndrome_zero(const std::vector<std::uint8_t>& c) const {
        for (const auto& row : h_.row_cols) {
            unsigned s = 0;
            for (int v : row) s ^= c[static_cast<std::size_t>(v)];
            if (s) return false;
        }
        return true;
    }

    SparseBinaryMatrix h_;
    int info_length_;
    Gf2Echelon ech_;
    std::vector<int> info_cols_;
    std::vector<Gf2Row> parity_masks_;
    std::vector<int> check_start_;
    std::vector<int> edge_var_;
};

}  // namespace turbodpsk
