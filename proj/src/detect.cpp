#include "afdm/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace afdm {

namespace {

std::vector<std::uint8_t> labels_to_bits(const std::vector<int>& labels,
                                         int bits_per_symbol) {
    std::vector<std::uint8_t> bits(labels.size() *
                                   static_cast<std::size_t>(bits_per_symbol));
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (int b = 0; b < bits_per_symbol; ++b)
            bits[i * static_cast<std::size_t>(bits_per_symbol) + static_cast<std::size_t>(b)] =
                static_cast<std::uint8_t>((labels[i] >> (bits_per_symbol - 1 - b)) & 1);
    return bits;
}

}  // namespace

namespace {

// BPSK fast path: symbols are real +-1, so the metric runs on the real parts
// of M^H M and M^H y. Same Gray walk and tie-break as the generic path.
std::vector<std::uint8_t> ml_detect_bpsk(const Eigen::MatrixXcd& h,
                                         const Eigen::VectorXcd& b, int n) {
    const Eigen::MatrixXd g = h.real();
    const Eigen::VectorXd br = b.real();
    std::vector<int> digits(static_cast<std::size_t>(n), 0);
    std::vector<int> dirs(static_cast<std::size_t>(n), 1);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);  // label 0 -> +1
    Eigen::VectorXd gx = g * x;
    double quad = x.dot(gx);
    double lin = x.dot(br);
    double best_metric = quad - 2.0 * lin;
    std::vector<int> best_digits = digits;
    const double* gcol = g.data();
    double* gxp = gx.data();
    while (true) {
        int i = 0;
        while (i < n) {
            const int next = digits[static_cast<std::size_t>(i)] + dirs[static_cast<std::size_t>(i)];
            if (next >= 0 && next < 2) break;
            dirs[static_cast<std::size_t>(i)] = -dirs[static_cast<std::size_t>(i)];
            ++i;
        }
        if (i == n) break;
        const int old_label = digits[static_cast<std::size_t>(i)];
        digits[static_cast<std::size_t>(i)] = old_label + dirs[static_cast<std::size_t>(i)];
        const double delta = old_label == 0 ? -2.0 : 2.0;  // +1 -> -1 or back
        quad += 2.0 * delta * gxp[i] + delta * delta * gcol[i * n + i];
        const double* col = gcol + static_cast<std::ptrdiff_t>(i) * n;
        for (int r = 0; r < n; ++r) gxp[r] += delta * col[r];
        lin += delta * br(i);
        const double metric = quad - 2.0 * lin;
        if (metric < best_metric) {
            best_metric = metric;
            best_digits = digits;
        } else if (metric == best_metric && digits < best_digits) {
            best_digits = digits;
        }
    }
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(best_digits[static_cast<std::size_t>(i)]);
    return bits;
}

}  // namespace

std::vector<std::uint8_t> ml_detect(const CVec& y, const Eigen::MatrixXcd& m,
                                    const Constellation& c) {
    const int n = static_cast<int>(m.cols());
    if (static_cast<int>(y.size()) != m.rows())
        throw std::invalid_argument("ml_detect: observation length mismatch");
    const int q = c.size();
    if (n * std::log2(static_cast<double>(q)) > 20.0 + 1e-9)
        throw std::invalid_argument(
            "ml_detect: enumeration budget exceeded (|constellation|^N > 2^20); "
            "use mmse_detect");

    Eigen::Map<const Eigen::VectorXcd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::MatrixXcd h = m.adjoint() * m;
    const Eigen::VectorXcd b = m.adjoint() * yv;

    if (q == 2 && c.map_label(0) == cplx{1.0, 0.0} && c.map_label(1) == cplx{-1.0, 0.0})
        return ml_detect_bpsk(h, b, n);

    // State for the incremental metric ||y - Mx||^2 = const - 2 Re(x^H b) + x^H H x.
    std::vector<int> digits(static_cast<std::size_t>(n), 0);
    std::vector<int> dirs(static_cast<std::size_t>(n), 1);
    Eigen::VectorXcd x(n);
    for (int i = 0; i < n; ++i) x(i) = c.map_label(0);
    Eigen::VectorXcd hx = h * x;
    double quad = std::real(x.dot(hx));  // x^H H x
    double lin = std::real(x.dot(b));    // Re(x^H b)

    double best_metric = quad - 2.0 * lin;
    std::vector<int> best_digits = digits;

    while (true) {
        // n-ary reflected Gray step: advance the lowest movable digit.
        int i = 0;
        while (i < n) {
            const int next = digits[static_cast<std::size_t>(i)] + dirs[static_cast<std::size_t>(i)];
            if (next >= 0 && next < q) break;
            dirs[static_cast<std::size_t>(i)] = -dirs[static_cast<std::size_t>(i)];
            ++i;
        }
        if (i == n) break;
        const int old_label = digits[static_cast<std::size_t>(i)];
        const int new_label = old_label + dirs[static_cast<std::size_t>(i)];
        digits[static_cast<std::size_t>(i)] = new_label;
        const cplx delta = c.map_label(static_cast<unsigned>(new_label)) -
                           c.map_label(static_cast<unsigned>(old_label));
        quad += 2.0 * std::real(std::conj(delta) * hx(i)) +
                std::norm(delta) * std::real(h(i, i));
        hx += delta * h.col(i);
        lin += std::real(std::conj(delta) * b(i));
        x(i) += delta;

        const double metric = quad - 2.0 * lin;
        if (metric < best_metric) {
            best_metric = metric;
            best_digits = digits;
        } else if (metric == best_metric && digits < best_digits) {
            best_digits = digits;
        }
    }
    return labels_to_bits(best_digits, c.bits_per_symbol());
}

std::vector<std::uint8_t> mmse_detect(const CVec& y, const Eigen::MatrixXcd& m,
                                      const Constellation& c, double noise_var) {
    if (noise_var <= 0.0)
        throw std::invalid_argument("mmse_detect: noise variance must be positive");
    const int n = static_cast<int>(m.cols());
    if (static_cast<int>(y.size()) != m.rows())
        throw std::invalid_argument("mmse_detect: observation length mismatch");
    Eigen::Map<const Eigen::VectorXcd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::MatrixXcd reg = m.adjoint() * m;
    reg.diagonal().array() += noise_var;
    const Eigen::LLT<Eigen::MatrixXcd> llt(reg);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("mmse_detect: regularized system not solvable");
    const Eigen::VectorXcd xhat = llt.solve(m.adjoint() * yv);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        labels[static_cast<std::size_t>(i)] = static_cast<int>(c.slice(xhat(i)));
    return labels_to_bits(labels, c.bits_per_symbol());
}

}  // namespace afdm
