// Regenerates the shipped code assets: the (3,6)-regular parity-check matrix
// and the frame interleavers for both outer codes.
//
//   gen_assets <asset-dir>

#include <fstream>
#include <iostream>

#include "turbodpsk/conv_code.hpp"
#include "turbodpsk/interleaver.hpp"
#include "turbodpsk/ldpc.hpp"

int main(int argc, char** argv) {
    using namespace turbodpsk;
    if (argc != 2) {
        std::cerr << "usage: gen_assets <asset-dir>\n";
        return 2;
    }
    const std::string dir = argv[1];

    constexpr std::uint64_t kPegSeed = 20111;
    constexpr std::uint64_t kInterleaverSeed = 5489;

    SparseBinaryMatrix h;
    std::uint64_t seed = kPegSeed;
    for (;; ++seed) {
        try {
            h = peg_construct(1008, 504, 3, seed);
        } catch (const std::exception& e) {
            std::cerr << "seed " << seed << ": " << e.what() << '\n';
            continue;
        }
        bool regular = true;
        for (const auto& r : h.row_cols) regular &= r.size() == 6;
        if (regular && has_girth_at_least_6(h)) break;
        std::cerr << "seed " << seed << ": rejected\n";
    }
    std::cout << "PEG seed " << seed << ", rank " << gf2_rank(h) << '\n';
    {
        std::ofstream f(dir + "/ldpc_1008x504_36.alist");
        write_alist(f, h);
    }
    for (int n : {1008, ConvCode::standard().length()}) {
        std::ofstream f(dir + "/interleaver_" + std::to_string(n) + ".txt");
        Interleaver::random(static_cast<std::size_t>(n), kInterleaverSeed + static_cast<std::uint64_t>(n)).write(f);
    }
    return 0;
}
