#include "afdm/channel.hpp"

#include "afdm/pulse.hpp"
#include "afdm/transforms.hpp"
#include "afdm/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace afdm {

namespace {

// Partial Fisher-Yates: k distinct values out of {0..n-1}.
std::vector<int> sample_distinct(int n, int k, Rng& rng) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
        const int j = rng.uniform_int(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

}  // namespace

LtvChannel random_channel(int n_paths, double max_delay, double max_doppler, Rng& rng,
                          const ChannelDrawOptions& opt) {
    if (n_paths < 1) throw std::invalid_argument("random_channel: need at least one path");
    if (max_delay < 0.0 || max_doppler < 0.0)
        throw std::invalid_argument("random_channel: negative spread");
    LtvChannel ch;
    ch.paths.resize(static_cast<std::size_t>(n_paths));
    const double gain_var = 1.0 / n_paths;
    if (opt.mode == ChannelMode::comm) {
        const int delay_slots = static_cast<int>(std::floor(max_delay)) + 1;
        if (opt.integer_doppler) {
            if (opt.doppler_grid_n < 2)
                throw std::invalid_argument("random_channel: integer Doppler needs grid N");
            const int alpha_max =
                static_cast<int>(std::floor(max_doppler * opt.doppler_grid_n + 1e-9));
            const int doppler_slots = 2 * alpha_max + 1;
            const int slots = delay_slots * doppler_slots;
            if (n_paths > slots)
                throw std::invalid_argument(
                    "random_channel: more paths than distinct (delay, Doppler) slots");
            const auto picks = sample_distinct(slots, n_paths, rng);
            for (int p = 0; p < n_paths; ++p) {
                const int idx = picks[static_cast<std::size_t>(p)];
                auto& path = ch.paths[static_cast<std::size_t>(p)];
                path.delay = static_cast<double>(idx % delay_slots);
                path.doppler = static_cast<double>(idx / delay_slots - alpha_max) /
                               opt.doppler_grid_n;
                path.gain = rng.cgauss(gain_var);
            }
        } else {
            // Delays stay distinct while slots allow; beyond that they repeat
            // and the continuous Dopplers keep the paths distinct.
            std::vector<int> delays;
            if (n_paths <= delay_slots) {
                delays = sample_distinct(delay_slots, n_paths, rng);
            } else {
                delays.resize(static_cast<std::size_t>(n_paths));
                for (auto& d : delays) d = rng.uniform_int(0, delay_slots - 1);
            }
            for (int p = 0; p < n_paths; ++p) {
                auto& path = ch.paths[static_cast<std::size_t>(p)];
                path.delay = static_cast<double>(delays[static_cast<std::size_t>(p)]);
                path.doppler = rng.uniform(-max_doppler, max_doppler);
                path.gain = rng.cgauss(gain_var);
            }
        }
    } else {
        for (auto& path : ch.paths) {
            path.delay = rng.uniform(0.0, max_delay);
            path.doppler = rng.uniform(-max_doppler, max_doppler);
            path.gain = rng.cgauss(gain_var);
        }
    }
    return ch;
}

TimeFrame apply_channel(const TimeFrame& frame, const LtvChannel& ch, ChannelMode mode) {
    if (ch.paths.empty()) throw std::invalid_argument("apply_channel: channel has no paths");
    const std::size_t len = frame.samples.size();
    if (len == 0) throw std::invalid_argument("apply_channel: empty frame");
    TimeFrame out = frame;
    out.samples.assign(len, cplx{0.0, 0.0});
    for (const auto& path : ch.paths) {
        const double shift = path.delay * frame.osf;
        if (shift >= static_cast<double>(len))
            throw std::invalid_argument("apply_channel: delay exceeds frame length");
        if (mode == ChannelMode::comm) {
            const double rounded = std::round(shift);
            if (std::abs(shift - rounded) > 1e-9)
                throw std::invalid_argument(
                    "apply_channel: fractional delay requires sensing mode");
            const std::size_t d = static_cast<std::size_t>(rounded);
            for (std::size_t i = d; i < len; ++i) {
                const double phase = kTwoPi * path.doppler * static_cast<double>(i) / frame.osf;
                out.samples[i] += path.gain * std::polar(1.0, phase) * frame.samples[i - d];
            }
        } else {
            const CVec delayed = fractional_delay_circular(frame.samples, shift);
            for (std::size_t i = 0; i < len; ++i) {
                const double phase = kTwoPi * path.doppler * static_cast<double>(i) / frame.osf;
                out.samples[i] += path.gain * std::polar(1.0, phase) * delayed[i];
            }
        }
    }
    return out;
}

TimeFrame add_awgn(const TimeFrame& frame, double snr_db, Rng& rng) {
    if (frame.samples.empty()) throw std::invalid_argument("add_awgn: empty frame");
    const double p = energy(frame.samples) / static_cast<double>(frame.samples.size());
    return add_awgn_ref(frame, snr_db, rng, p);
}

TimeFrame add_awgn_ref(const TimeFrame& frame, double snr_db, Rng& rng,
                       double reference_power) {
    if (frame.samples.empty()) throw std::invalid_argument("add_awgn: empty frame");
    if (std::isinf(snr_db) && snr_db > 0.0) return frame;
    const double noise_var = reference_power / std::pow(10.0, snr_db / 10.0);
    TimeFrame out = frame;
    for (auto& v : out.samples) v += rng.cgauss(noise_var);
    return out;
}

Eigen::MatrixXcd effective_matrix(const LtvChannel& ch, const ChirpConfig& cfg) {
    cfg.validate();
    if (cfg.n > 1024) throw std::invalid_argument("effective_matrix: N capped at 1024");
    for (const auto& path : ch.paths) {
        const double rounded = std::round(path.delay);
        if (std::abs(path.delay - rounded) > 1e-9)
            throw std::invalid_argument("effective_matrix: integer delays only");
        if (rounded < 0.0 || rounded > cfg.cpp_len)
            throw std::invalid_argument("effective_matrix: delay must not exceed the prefix");
    }
    const int n = cfg.n;
    Eigen::MatrixXcd m(n, n);
    CVec basis(static_cast<std::size_t>(n), cplx{0.0, 0.0});
    for (int col = 0; col < n; ++col) {
        basis[static_cast<std::size_t>(col)] = cplx{1.0, 0.0};
        const TimeFrame tx = modulate(basis, cfg);
        const TimeFrame rx = apply_channel(tx, ch, ChannelMode::comm);
        const CVec y = daft(remove_cpp(rx, cfg), cfg);
        for (int row = 0; row < n; ++row) m(row, col) = y[static_cast<std::size_t>(row)];
        basis[static_cast<std::size_t>(col)] = cplx{0.0, 0.0};
    }
    return m;
}

int daft_shift_of_path(const ChirpConfig& cfg, int delay, int doppler_index) {
    if (!cfg.c1_exact)
        throw std::invalid_argument("daft_shift_of_path: requires exact-rational c1");
    const long k = cfg.c1_num;
    const long n = cfg.n;
    long shift = (static_cast<long>(doppler_index) - k * delay) % n;
    if (shift < 0) shift += n;
    return static_cast<int>(shift);
}

int separability_min_k(int n, int max_delay, int max_alpha) {
    for (int k = 1; k <= n; ++k) {
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        bool ok = true;
        for (int l = 0; l <= max_delay && ok; ++l) {
            for (int a = -max_alpha; a <= max_alpha && ok; ++a) {
                long shift = (static_cast<long>(a) - static_cast<long>(k) * l) % n;
                if (shift < 0) shift += n;
                if (seen[static_cast<std::size_t>(shift)]) ok = false;
                seen[static_cast<std::size_t>(shift)] = true;
            }
        }
        if (ok) return k;
    }
    throw std::invalid_argument("separability_min_k: no k separates the requested spread");
}

}  // namespace afdm
