// constellation.hpp - unit-energy Gray-labeled symbol alphabets
#pragma once

#include "afdm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace afdm {

enum class ConstellationKind { bpsk, qpsk, qam16 };

class Constellation {
public:
    static Constellation make(ConstellationKind kind);
    static Constellation from_name(const std::string& name);  // bpsk | qpsk | 4qam | 16qam

    const std::string& name() const { return name_; }
    int bits_per_symbol() const { return bits_per_symbol_; }
    int size() const { return static_cast<int>(points_.size()); }
    const CVec& points() const { return points_; }

    cplx map_label(unsigned label) const { return points_[label]; }
    unsigned slice(cplx y) const;  // nearest-point hard decision

    CVec map_bits(const std::vector<std::uint8_t>& bits) const;
    std::vector<std::uint8_t> demap(const CVec& symbols) const;

private:
    std::string name_;
    int bits_per_symbol_ = 1;
    CVec points_;  // indexed by bit label, first bit most significant
};

// Free-function spellings used throughout the experiment code.
CVec map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c);
std::vector<std::uint8_t> demap_symbols(const CVec& symbols, const Constellation& c);

}  // namespace afdm
