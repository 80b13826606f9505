#include "afdm/transforms.hpp"

#include "afdm/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace afdm {

namespace {

inline cplx cis_turns(double cycles) {
    return std::polar(1.0, -kTwoPi * cycles);  // exp(-j 2 pi cycles)
}

inline double frac01(double x) {
    double f = std::fmod(x, 1.0);
    return f < 0.0 ? f + 1.0 : f;
}

double c2_cycles(const ChirpConfig& cfg, std::int64_t idx) {
    return chirp_cycles(cfg.c2, idx);
}

}  // namespace

double chirp_cycles(double c, std::int64_t idx) {
    const double sq = static_cast<double>(idx) * static_cast<double>(idx);
    return frac01(c * sq);
}

double rational_cycles(std::int64_t num, std::int64_t value, std::int64_t den) {
    std::int64_t n = num % den;
    std::int64_t v = value % den;
    std::int64_t r = (n * v) % den;
    if (r < 0) r += den;
    return static_cast<double>(r) / static_cast<double>(den);
}

double c1_cycles(const ChirpConfig& cfg, std::int64_t idx) {
    if (cfg.c1_exact) {
        const std::int64_t den = 2 * static_cast<std::int64_t>(cfg.n);
        return rational_cycles(cfg.c1_num, (idx % den) * (idx % den), den);
    }
    return chirp_cycles(cfg.c1, idx);
}

CVec chirp_phase_vector(double c, int m_len) {
    if (m_len < 1) throw std::invalid_argument("chirp_phase_vector: length must be >= 1");
    CVec v(static_cast<size_t>(m_len));
    for (int i = 0; i < m_len; ++i) v[static_cast<size_t>(i)] = cis_turns(chirp_cycles(c, i));
    return v;
}

CVec idaft(const CVec& x, const ChirpConfig& cfg) {
    cfg.validate();
    const int n = cfg.n;
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument("idaft: input length does not match N");
    CVec y(x.size());
    for (int m = 0; m < n; ++m)
        y[static_cast<size_t>(m)] = x[static_cast<size_t>(m)] * std::conj(cis_turns(c2_cycles(cfg, m)));
    CVec t = fft::ifft_unitary(y);
    for (int i = 0; i < n; ++i)
        t[static_cast<size_t>(i)] *= std::conj(cis_turns(c1_cycles(cfg, i)));
    return t;
}

CVec daft(const CVec& s, const ChirpConfig& cfg) {
    cfg.validate();
    const int n = cfg.n;
    if (static_cast<int>(s.size()) != n)
        throw std::invalid_argument("daft: input length does not match N");
    CVec t(s.size());
    for (int i = 0; i < n; ++i)
        t[static_cast<size_t>(i)] = s[static_cast<size_t>(i)] * cis_turns(c1_cycles(cfg, i));
    CVec y = fft::fft_unitary(t);
    for (int m = 0; m < n; ++m)
        y[static_cast<size_t>(m)] *= cis_turns(c2_cycles(cfg, m));
    return y;
}

Eigen::MatrixXcd daft_matrix(const ChirpConfig& cfg) {
    cfg.validate();
    const int n = cfg.n;
    if (n > 4096) throw std::invalid_argument("daft_matrix: N capped at 4096");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::MatrixXcd a(n, n);
    for (int m = 0; m < n; ++m) {
        const double cyc_m = c2_cycles(cfg, m);
        for (int col = 0; col < n; ++col) {
            const std::int64_t twiddle = (static_cast<std::int64_t>(m) * col) % n;
            const double cycles = c1_cycles(cfg, col) + cyc_m +
                                  static_cast<double>(twiddle) / static_cast<double>(n);
            a(m, col) = scale * cis_turns(cycles);
        }
    }
    return a;
}

CVec add_cpp(const CVec& s, const ChirpConfig& cfg) {
    cfg.validate();
    const int n = cfg.n;
    const int l = cfg.cpp_len;
    if (static_cast<int>(s.size()) != n)
        throw std::invalid_argument("add_cpp: input length does not match N");
    CVec out(static_cast<size_t>(n + l));
    for (int k = 0; k < l; ++k) {
        const int idx = k - l;  // n in {-L..-1}
        double cycles;
        if (cfg.c1_exact) {
            const std::int64_t den = 2 * static_cast<std::int64_t>(n);
            const std::int64_t value = static_cast<std::int64_t>(n) * n +
                                       2 * static_cast<std::int64_t>(n) * idx;
            cycles = rational_cycles(cfg.c1_num, value, den);
        } else {
            const double value = static_cast<double>(n) * n + 2.0 * n * idx;
            cycles = frac01(cfg.c1 * value);
        }
        out[static_cast<size_t>(k)] = s[static_cast<size_t>(n + idx)] * cis_turns(cycles);
    }
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(l + i)] = s[static_cast<size_t>(i)];
    return out;
}

CVec remove_cpp(const TimeFrame& frame, const ChirpConfig& cfg, int symbol_index) {
    cfg.validate();
    if (!frame.has_cpp) throw std::invalid_argument("remove_cpp: frame carries no prefix");
    if (frame.osf != 1) throw std::invalid_argument("remove_cpp: expects a symbol-rate frame");
    const int n = cfg.n;
    const int l = cfg.cpp_len;
    const std::size_t begin =
        static_cast<std::size_t>(symbol_index) * static_cast<std::size_t>(n + l) +
        static_cast<std::size_t>(l);
    if (symbol_index < 0 || begin + static_cast<std::size_t>(n) > frame.samples.size())
        throw std::invalid_argument("remove_cpp: frame too short for requested symbol");
    return CVec(frame.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                frame.samples.begin() + static_cast<std::ptrdiff_t>(begin + n));
}

}  // namespace afdm
