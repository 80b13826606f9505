#include "afdm/ber.hpp"

#include "afdm/detect.hpp"
#include "afdm/rng.hpp"
#include "afdm/transforms.hpp"
#include "afdm/waveform.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace afdm {

namespace {

constexpr long long kBlockTrials = 256;

struct TrialContext {
    ChirpConfig cfg;
    Constellation constellation = Constellation::make(ConstellationKind::bpsk);
    ChannelDrawOptions draw;
    double max_delay = 0.0;
    double max_doppler = 0.0;
    int n_paths = 1;
    BerConfig::Detector detector = BerConfig::Detector::ml;
    // Per-(delay, alpha) single-path DAFT-domain matrices; valid in
    // integer-Doppler mode where the slot grid is small.
    std::vector<Eigen::MatrixXcd> slot_matrix;
    int delay_slots = 0;
    int alpha_max = 0;
};

Eigen::MatrixXcd assemble_matrix(const TrialContext& ctx, const LtvChannel& ch) {
    if (!ctx.slot_matrix.empty()) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(ctx.cfg.n, ctx.cfg.n);
        for (const auto& p : ch.paths) {
            const int l = static_cast<int>(std::lround(p.delay));
            const int a = static_cast<int>(std::lround(p.doppler * ctx.cfg.n));
            const std::size_t slot = static_cast<std::size_t>(
                (a + ctx.alpha_max) * ctx.delay_slots + l);
            m += p.gain * ctx.slot_matrix[slot];
        }
        return m;
    }
    return effective_matrix(ch, ctx.cfg);
}

// One trial: returns bit errors.
long long run_trial(const TrialContext& ctx, double snr_db, Rng& rng) {
    const int n = ctx.cfg.n;
    const int bps = ctx.constellation.bits_per_symbol();
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n * bps));
    for (auto& b : bits) b = rng.bit() ? 1 : 0;
    const CVec grid = ctx.constellation.map_bits(bits);

    Rng ch_rng = rng;  // same stream, sequential draws
    const LtvChannel ch =
        random_channel(ctx.n_paths, ctx.max_delay, ctx.max_doppler, ch_rng, ctx.draw);
    rng = ch_rng;

    const TimeFrame tx = modulate(grid, ctx.cfg);
    const TimeFrame rx = apply_channel(tx, ch, ChannelMode::comm);
    // Noise calibrated to the nominal unit transmit power so fading scales
    // the instantaneous SNR, as the analytic Rayleigh reference assumes.
    const TimeFrame noisy = add_awgn_ref(rx, snr_db, rng, 1.0);
    const CVec y = demodulate(noisy, ctx.cfg);
    const Eigen::MatrixXcd m = assemble_matrix(ctx, ch);

    std::vector<std::uint8_t> detected;
    if (ctx.detector == BerConfig::Detector::ml) {
        detected = ml_detect(y, m, ctx.constellation);
    } else {
        const double noise_var = std::isinf(snr_db) ? 1e-12
                                                    : std::pow(10.0, -snr_db / 10.0);
        detected = mmse_detect(y, m, ctx.constellation, noise_var);
    }
    long long errors = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] != detected[i]) ++errors;
    return errors;
}

}  // namespace

const char* waveform_name(WaveformKind kind) {
    switch (kind) {
        case WaveformKind::ofdm: return "ofdm";
        case WaveformKind::ocdm: return "ocdm";
        case WaveformKind::afdm: return "afdm";
    }
    return "?";
}

BerCurve run_ber(const BerConfig& cfg) {
    if (cfg.snr_db.empty()) throw std::invalid_argument("run_ber: empty SNR grid");
    if (cfg.n_paths < 1) throw std::invalid_argument("run_ber: need at least one path");

    TrialContext ctx;
    long k = 0;
    double c2 = 0.0;
    const int alpha_max = static_cast<int>(std::floor(cfg.max_doppler * cfg.n + 1e-9));
    switch (cfg.waveform) {
        case WaveformKind::ofdm:
            k = 0;
            c2 = 0.0;
            break;
        case WaveformKind::ocdm:
            k = 1;
            c2 = 1.0 / (2.0 * cfg.n);
            break;
        case WaveformKind::afdm:
            k = cfg.afdm_k >= 0
                    ? cfg.afdm_k
                    : separability_min_k(cfg.n, static_cast<int>(std::floor(cfg.max_delay)),
                                         alpha_max);
            c2 = cfg.c2;
            break;
    }
    ctx.cfg = ChirpConfig::from_ratio(cfg.n, k, c2, 1.0, cfg.cpp_len);
    ctx.constellation = Constellation::from_name(cfg.constellation);
    ctx.n_paths = cfg.n_paths;
    ctx.max_delay = cfg.max_delay;
    ctx.max_doppler = cfg.max_doppler;
    ctx.detector = cfg.detector;
    ctx.draw.mode = ChannelMode::comm;
    ctx.draw.integer_doppler = cfg.integer_doppler;
    ctx.draw.doppler_grid_n = cfg.n;

    if (cfg.integer_doppler) {
        // Precompute the single-path response for every (delay, alpha) slot.
        ctx.delay_slots = static_cast<int>(std::floor(cfg.max_delay)) + 1;
        ctx.alpha_max = alpha_max;
        ctx.slot_matrix.resize(static_cast<std::size_t>(ctx.delay_slots) *
                               (2 * static_cast<std::size_t>(ctx.alpha_max) + 1));
        for (int a = -ctx.alpha_max; a <= ctx.alpha_max; ++a) {
            for (int l = 0; l < ctx.delay_slots; ++l) {
                LtvChannel unit;
                unit.paths.push_back(
                    {cplx{1.0, 0.0}, static_cast<double>(l), static_cast<double>(a) / cfg.n});
                ctx.slot_matrix[static_cast<std::size_t>((a + ctx.alpha_max) * ctx.delay_slots +
                                                         l)] = effective_matrix(unit, ctx.cfg);
            }
        }
    }

    BerCurve curve;
    curve.label = waveform_name(cfg.waveform);

    const int n_threads = std::max(1, cfg.threads);
    // Fixed round size keeps the stopping boundary, and therefore the output,
    // independent of the thread count.
    const int blocks_per_round = 8;
    const int bits_per_trial = cfg.n * ctx.constellation.bits_per_symbol();

    for (std::size_t pt = 0; pt < cfg.snr_db.size(); ++pt) {
        const double snr = cfg.snr_db[pt];
        long long errors = 0;
        long long trials = 0;
        long long next_block = 0;
        while (errors < cfg.target_errors && trials < cfg.max_trials) {
            const long long first_block = next_block;
            std::vector<long long> block_errors(static_cast<std::size_t>(blocks_per_round), 0);
            std::atomic<int> cursor{0};
            auto worker = [&]() {
                while (true) {
                    const int slot = cursor.fetch_add(1);
                    if (slot >= blocks_per_round) return;
                    const long long block = first_block + slot;
                    long long e = 0;
                    for (long long t = 0; t < kBlockTrials; ++t) {
                        const std::uint64_t trial_idx =
                            static_cast<std::uint64_t>(block * kBlockTrials + t);
                        Rng rng = Rng::stream(cfg.seed, 1000 + pt, trial_idx);
                        e += run_trial(ctx, snr, rng);
                    }
                    block_errors[static_cast<std::size_t>(slot)] = e;
                }
            };
            std::vector<std::thread> pool;
            for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
            worker();
            for (auto& th : pool) th.join();
            for (const long long e : block_errors) errors += e;
            next_block += blocks_per_round;
            trials += static_cast<long long>(blocks_per_round) * kBlockTrials;
        }
        BerPoint point;
        point.snr_db = snr;
        point.bit_errors = errors;
        point.bits = trials * bits_per_trial;
        point.ber = point.bits > 0 ? static_cast<double>(errors) / point.bits : 0.0;
        point.ci95_half =
            1.96 * std::sqrt(point.ber * (1.0 - point.ber) / static_cast<double>(point.bits));
        curve.points.push_back(point);
    }

    std::ostringstream c1_str;
    c1_str << k << "/(2*" << cfg.n << ")";
    curve.config_echo["waveform"] = curve.label;
    curve.config_echo["n"] = std::to_string(cfg.n);
    curve.config_echo["cpp_len"] = std::to_string(cfg.cpp_len);
    curve.config_echo["c1"] = c1_str.str();
    curve.config_echo["c2"] = std::to_string(c2);
    curve.config_echo["constellation"] = ctx.constellation.name();
    curve.config_echo["n_paths"] = std::to_string(cfg.n_paths);
    curve.config_echo["max_delay"] = std::to_string(cfg.max_delay);
    curve.config_echo["max_doppler"] = std::to_string(cfg.max_doppler);
    curve.config_echo["integer_doppler"] = cfg.integer_doppler ? "1" : "0";
    curve.config_echo["detector"] =
        cfg.detector == BerConfig::Detector::ml ? "ml" : "mmse";
    curve.config_echo["target_errors"] = std::to_string(cfg.target_errors);
    curve.config_echo["max_trials"] = std::to_string(cfg.max_trials);
    curve.config_echo["seed"] = std::to_string(cfg.seed);
    curve.config_echo["snr_reference_power"] = "1.0 (nominal transmit)";
    return curve;
}

double estimate_diversity_order(const BerCurve& curve, double snr_lo_db, double snr_hi_db,
                                long long min_errors) {
    std::vector<double> xs, ys;
    for (const auto& p : curve.points) {
        if (p.snr_db < snr_lo_db || p.snr_db > snr_hi_db) continue;
        if (p.bit_errors < min_errors || p.ber <= 0.0) continue;
        xs.push_back(std::log10(std::pow(10.0, p.snr_db / 10.0)));
        ys.push_back(std::log10(p.ber));
    }
    if (xs.size() < 2)
        throw std::invalid_argument(
            "estimate_diversity_order: need >= 2 well-populated points in the window");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

}  // namespace afdm
