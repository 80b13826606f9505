#include "afdm/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace afdm {

namespace {

// 2-bit Gray axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
double gray2_level(unsigned b_hi, unsigned b_lo) {
    static const double levels[4] = {-3.0, -1.0, +1.0, +3.0};
    const unsigned gray = (b_hi << 1) | b_lo;
    static const unsigned order[4] = {0, 1, 3, 2};
    for (unsigned i = 0; i < 4; ++i)
        if (order[i] == gray) return levels[i];
    return 0.0;  // unreachable
}

}  // namespace

Constellation Constellation::make(ConstellationKind kind) {
    Constellation c;
    switch (kind) {
        case ConstellationKind::bpsk:
            c.name_ = "bpsk";
            c.bits_per_symbol_ = 1;
            c.points_ = {cplx{1.0, 0.0}, cplx{-1.0, 0.0}};
            break;
        case ConstellationKind::qpsk: {
            c.name_ = "qpsk";
            c.bits_per_symbol_ = 2;
            const double a = 1.0 / std::sqrt(2.0);
            c.points_.resize(4);
            for (unsigned label = 0; label < 4; ++label) {
                const double re = (label & 2u) ? -a : a;
                const double im = (label & 1u) ? -a : a;
                c.points_[label] = cplx{re, im};
            }
            break;
        }
        case ConstellationKind::qam16: {
            c.name_ = "16qam";
            c.bits_per_symbol_ = 4;
            const double s = 1.0 / std::sqrt(10.0);
            c.points_.resize(16);
            for (unsigned label = 0; label < 16; ++label) {
                const double re = gray2_level((label >> 3) & 1u, (label >> 2) & 1u) * s;
                const double im = gray2_level((label >> 1) & 1u, label & 1u) * s;
                c.points_[label] = cplx{re, im};
            }
            break;
        }
    }
    return c;
}

Constellation Constellation::from_name(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "bpsk") return make(ConstellationKind::bpsk);
    if (lower == "qpsk" || lower == "4qam") return make(ConstellationKind::qpsk);
    if (lower == "16qam") return make(ConstellationKind::qam16);
    throw std::invalid_argument("unknown constellation: " + name);
}

unsigned Constellation::slice(cplx y) const {
    unsigned best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (unsigned label = 0; label < points_.size(); ++label) {
        const double d = std::norm(y - points_[label]);
        if (d < best_d) {
            best_d = d;
            best = label;
        }
    }
    return best;
}

CVec Constellation::map_bits(const std::vector<std::uint8_t>& bits) const {
    if (bits.size() % static_cast<std::size_t>(bits_per_symbol_) != 0)
        throw std::invalid_argument("map_bits: bit count not divisible by bits per symbol");
    CVec out(bits.size() / static_cast<std::size_t>(bits_per_symbol_));
    for (std::size_t i = 0; i < out.size(); ++i) {
        unsigned label = 0;
        for (int b = 0; b < bits_per_symbol_; ++b)
            label = (label << 1) | (bits[i * static_cast<std::size_t>(bits_per_symbol_) +
                                         static_cast<std::size_t>(b)] & 1u);
        out[i] = points_[label];
    }
    return out;
}

std::vector<std::uint8_t> Constellation::demap(const CVec& symbols) const {
    std::vector<std::uint8_t> bits(symbols.size() * static_cast<std::size_t>(bits_per_symbol_));
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const unsigned label = slice(symbols[i]);
        for (int b = 0; b < bits_per_symbol_; ++b)
            bits[i * static_cast<std::size_t>(bits_per_symbol_) + static_cast<std::size_t>(b)] =
                static_cast<std::uint8_t>((label >> (bits_per_symbol_ - 1 - b)) & 1u);
    }
    return bits;
}

CVec map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c) {
    return c.map_bits(bits);
}

std::vector<std::uint8_t> demap_symbols(const CVec& symbols, const Constellation& c) {
    return c.demap(symbols);
}

}  // namespace afdm
