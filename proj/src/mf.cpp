#include "afdm/mf.hpp"

#include "afdm/pulse.hpp"
#include "afdm/transforms.hpp"

#include <cmath>
#include <stdexcept>

namespace afdm {

namespace {

// Payload-sample mask for a frame of n_symbols prefixed symbols.
std::vector<std::size_t> payload_indices(const ChirpConfig& cfg, int n_symbols) {
    std::vector<std::size_t> idx;
    idx.reserve(static_cast<std::size_t>(n_symbols) * static_cast<std::size_t>(cfg.n));
    for (int s = 0; s < n_symbols; ++s) {
        const std::size_t base = static_cast<std::size_t>(s) *
                                     static_cast<std::size_t>(cfg.symbol_len()) +
                                 static_cast<std::size_t>(cfg.cpp_len);
        for (int i = 0; i < cfg.n; ++i) idx.push_back(base + static_cast<std::size_t>(i));
    }
    return idx;
}

CVec shift_frame(const CVec& x, double shift_samples) {
    const double rounded = std::round(shift_samples);
    if (std::abs(shift_samples - rounded) < 1e-12) {
        const long s = static_cast<long>(rounded);
        CVec out(x.size(), cplx{0.0, 0.0});
        for (long i = std::max(0L, s); i < static_cast<long>(x.size()); ++i)
            out[static_cast<std::size_t>(i)] = (i - s >= 0 && i - s < static_cast<long>(x.size()))
                                                   ? x[static_cast<std::size_t>(i - s)]
                                                   : cplx{0.0, 0.0};
        return out;
    }
    return fractional_delay_circular(x, shift_samples);
}

double parabolic_offset(double lo, double mid, double hi) {
    const double den = lo - 2.0 * mid + hi;
    if (den >= 0.0) return 0.0;  // not a strict local max
    double off = 0.5 * (lo - hi) / den;
    if (off > 0.5) off = 0.5;
    if (off < -0.5) off = -0.5;
    return off;
}

}  // namespace

MatchedFilterResult matched_filter(const TimeFrame& rx, const TimeFrame& tx,
                                   const ChirpConfig& cfg, MfDomain domain,
                                   const std::vector<double>& delay_s,
                                   const std::vector<double>& doppler_hz) {
    if (rx.osf != 1 || tx.osf != 1)
        throw std::invalid_argument("matched_filter: symbol-rate frames expected");
    if (!rx.has_cpp || !tx.has_cpp || rx.samples.size() != tx.samples.size())
        throw std::invalid_argument("matched_filter: rx/tx frame geometry mismatch");
    if (delay_s.empty() || doppler_hz.empty())
        throw std::invalid_argument("matched_filter: empty search grid");
    const double ts = rx.sample_interval;
    const int n_symbols = static_cast<int>(rx.samples.size()) / cfg.symbol_len();
    const auto payload = payload_indices(cfg, n_symbols);

    const int n_delay = static_cast<int>(delay_s.size());
    const int n_dopp = static_cast<int>(doppler_hz.size());
    Eigen::MatrixXcd values(n_delay, n_dopp);

    if (domain == MfDomain::time) {
        // Lag product over payload samples, then Doppler probes.
        for (int d = 0; d < n_delay; ++d) {
            const CVec shifted = shift_frame(tx.samples, delay_s[static_cast<std::size_t>(d)] / ts);
            for (int j = 0; j < n_dopp; ++j) {
                const double w = kTwoPi * doppler_hz[static_cast<std::size_t>(j)] * ts;
                cplx acc{0.0, 0.0};
                for (const std::size_t i : payload) {
                    const cplx tmpl = shifted[i] * std::polar(1.0, w * static_cast<double>(i));
                    acc += rx.samples[i] * std::conj(tmpl);
                }
                values(d, j) = acc;
            }
        }
    } else {
        // DAFT-domain correlation, symbol by symbol.
        std::vector<CVec> rx_daft(static_cast<std::size_t>(n_symbols));
        for (int s = 0; s < n_symbols; ++s) rx_daft[static_cast<std::size_t>(s)] = daft(remove_cpp(rx, cfg, s), cfg);
        for (int d = 0; d < n_delay; ++d) {
            const CVec shifted = shift_frame(tx.samples, delay_s[static_cast<std::size_t>(d)] / ts);
            for (int j = 0; j < n_dopp; ++j) {
                const double w = kTwoPi * doppler_hz[static_cast<std::size_t>(j)] * ts;
                TimeFrame tmpl = tx;
                tmpl.samples.resize(shifted.size());
                for (std::size_t i = 0; i < shifted.size(); ++i)
                    tmpl.samples[i] = shifted[i] * std::polar(1.0, w * static_cast<double>(i));
                cplx acc{0.0, 0.0};
                for (int s = 0; s < n_symbols; ++s) {
                    const CVec td = daft(remove_cpp(tmpl, cfg, s), cfg);
                    const CVec& rd = rx_daft[static_cast<std::size_t>(s)];
                    for (int i = 0; i < cfg.n; ++i)
                        acc += rd[static_cast<std::size_t>(i)] * std::conj(td[static_cast<std::size_t>(i)]);
                }
                values(d, j) = acc;
            }
        }
    }

    MatchedFilterResult result;
    result.surface.delay_axis = delay_s;
    result.surface.doppler_axis = doppler_hz;
    result.surface.values = values;
    result.surface.frame_energy = energy(rx.samples);

    int best_d = 0, best_j = 0;
    double best = -1.0;
    for (int d = 0; d < n_delay; ++d)
        for (int j = 0; j < n_dopp; ++j)
            if (std::abs(values(d, j)) > best) {
                best = std::abs(values(d, j));
                best_d = d;
                best_j = j;
            }

    double delay_hat = delay_s[static_cast<std::size_t>(best_d)];
    double doppler_hat = doppler_hz[static_cast<std::size_t>(best_j)];
    if (best_d > 0 && best_d + 1 < n_delay) {
        const double off = parabolic_offset(std::abs(values(best_d - 1, best_j)), best,
                                            std::abs(values(best_d + 1, best_j)));
        const double step = off >= 0.0
                                ? delay_s[static_cast<std::size_t>(best_d + 1)] - delay_hat
                                : delay_hat - delay_s[static_cast<std::size_t>(best_d - 1)];
        delay_hat += off * step;
    }
    if (best_j > 0 && best_j + 1 < n_dopp) {
        const double off = parabolic_offset(std::abs(values(best_d, best_j - 1)), best,
                                            std::abs(values(best_d, best_j + 1)));
        const double step = off >= 0.0
                                ? doppler_hz[static_cast<std::size_t>(best_j + 1)] - doppler_hat
                                : doppler_hat - doppler_hz[static_cast<std::size_t>(best_j - 1)];
        doppler_hat += off * step;
    }
    result.estimate.delay_s = delay_hat;
    result.estimate.doppler_hz = doppler_hat;
    result.estimate.peak_magnitude = best;
    result.estimate.method = domain == MfDomain::time ? "mf-time" : "mf-daft";

    if (cfg.c1_exact) {
        // Warn when the searched window reaches the first AF replica.
        const UnambiguityRegion region = unambiguity_parallelogram(cfg);
        const double max_d = std::max(std::abs(delay_s.front()), std::abs(delay_s.back())) / ts;
        const double max_v = std::max(std::abs(doppler_hz.front()), std::abs(doppler_hz.back())) *
                             ts;
        for (const auto& [pd, pv] : region.replica_peaks(max_d, max_v)) {
            if (pd == 0.0 && pv == 0.0) continue;
            result.estimate.outside_unambiguous = true;
            break;
        }
    }
    return result;
}

std::vector<std::pair<int, int>> find_peaks(const AmbiguitySurface& surface,
                                            double peak_floor_rel) {
    const int rows = static_cast<int>(surface.values.rows());
    const int cols = static_cast<int>(surface.values.cols());
    double global = 0.0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) global = std::max(global, std::abs(surface.values(r, c)));
    std::vector<std::pair<int, int>> peaks;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double v = std::abs(surface.values(r, c));
            if (v < peak_floor_rel * global) continue;
            bool is_peak = true;
            for (int dr = -1; dr <= 1 && is_peak; ++dr) {
                for (int dc = -1; dc <= 1 && is_peak; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
                    if (std::abs(surface.values(rr, cc)) > v) is_peak = false;
                }
            }
            if (is_peak) peaks.emplace_back(r, c);
        }
    }
    return peaks;
}

}  // namespace afdm
