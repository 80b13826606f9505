#include "afdm/pulse.hpp"

#include "afdm/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace afdm {

std::vector<double> rrc_taps(const RrcConfig& rrc) {
    if (rrc.beta < 0.0 || rrc.beta > 1.0)
        throw std::invalid_argument("rrc_taps: beta must lie in [0, 1]");
    if (rrc.span_symbols < 1 || rrc.osf < 1)
        throw std::invalid_argument("rrc_taps: span and osf must be positive");
    const int n = rrc.n_taps();
    const double beta = rrc.beta;
    std::vector<double> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // t in symbol intervals, centered.
        const double t = (i - (n - 1) / 2.0) / rrc.osf;
        double v;
        if (std::abs(t) < 1e-12) {
            v = 1.0 - beta + 4.0 * beta / kPi;
        } else if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-12) {
            const double a = kPi / (4.0 * beta);
            v = (beta / std::sqrt(2.0)) *
                ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
        } else {
            const double num = std::sin(kPi * t * (1.0 - beta)) +
                               4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
            const double den = kPi * t * (1.0 - 16.0 * beta * beta * t * t);
            v = num / den;
        }
        h[static_cast<std::size_t>(i)] = v;
    }
    double e = 0.0;
    for (const double v : h) e += v * v;
    const double s = 1.0 / std::sqrt(e);
    for (double& v : h) v *= s;
    return h;
}

TimeFrame pulse_shape(const TimeFrame& frame, const RrcConfig& rrc) {
    if (frame.osf != 1) throw std::invalid_argument("pulse_shape: frame already oversampled");
    const std::vector<double> h = rrc_taps(rrc);
    const int osf = rrc.osf;
    const std::size_t up_len = frame.samples.size() * static_cast<std::size_t>(osf);
    const std::size_t out_len = up_len + h.size() - 1;
    TimeFrame out;
    out.samples.assign(out_len, cplx{0.0, 0.0});
    // Zero-stuffed convolution: only every osf-th input sample contributes.
    for (std::size_t k = 0; k < frame.samples.size(); ++k) {
        const cplx x = frame.samples[k];
        if (x == cplx{0.0, 0.0}) continue;
        const std::size_t base = k * static_cast<std::size_t>(osf);
        for (std::size_t j = 0; j < h.size(); ++j) out.samples[base + j] += x * h[j];
    }
    out.osf = osf;
    out.has_cpp = frame.has_cpp;
    out.sample_interval = frame.sample_interval / osf;
    out.n_symbols = frame.n_symbols;
    out.filter_tail = static_cast<int>(h.size()) - 1;
    return out;
}

CVec matched_filter_downsample(const TimeFrame& shaped, const RrcConfig& rrc, int n_out) {
    if (shaped.osf != rrc.osf)
        throw std::invalid_argument("matched_filter_downsample: osf mismatch");
    const std::vector<double> h = rrc_taps(rrc);
    const std::size_t full_len = shaped.samples.size() + h.size() - 1;
    CVec filtered(full_len, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < shaped.samples.size(); ++k) {
        const cplx x = shaped.samples[k];
        if (x == cplx{0.0, 0.0}) continue;
        for (std::size_t j = 0; j < h.size(); ++j) filtered[k + j] += x * h[j];
    }
    const std::size_t delay = h.size() - 1;  // two filters, each (n_taps-1)/2
    CVec out(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
        const std::size_t idx = delay + static_cast<std::size_t>(i) *
                                            static_cast<std::size_t>(rrc.osf);
        out[static_cast<std::size_t>(i)] =
            idx < filtered.size() ? filtered[idx] : cplx{0.0, 0.0};
    }
    return out;
}

CVec fractional_delay_circular(const CVec& x, double shift_samples) {
    const int n = static_cast<int>(x.size());
    if (n == 0) return {};
    CVec spec = fft::fft(x);
    for (int k = 0; k < n; ++k) {
        const double f = (k <= n / 2) ? static_cast<double>(k) : static_cast<double>(k - n);
        spec[static_cast<std::size_t>(k)] *=
            std::polar(1.0, -kTwoPi * f * shift_samples / n);
    }
    CVec out = fft::ifft(spec);
    const double s = 1.0 / n;
    for (auto& v : out) v *= s;
    return out;
}

}  // namespace afdm
