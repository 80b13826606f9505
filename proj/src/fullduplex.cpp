#include "afdm/fullduplex.hpp"

#include "afdm/channel.hpp"
#include "afdm/constellation.hpp"
#include "afdm/detect.hpp"
#include "afdm/grid.hpp"
#include "afdm/rng.hpp"
#include "afdm/transforms.hpp"
#include "afdm/waveform.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace afdm {

namespace {

int cyclic_distance(int a, int b, int n) {
    const int d = std::abs(a - b) % n;
    return std::min(d, n - d);
}

GridLayout user_layout(const FdScenario& sc, int own_pilot, int other_pilot) {
    GridLayout layout = GridLayout::embedded_pilot(sc.cfg.n, own_pilot, sc.guard_each_side,
                                                   sc.pilot_amplitude);
    layout.reserve_guard_band(other_pilot - sc.guard_band_half, 2 * sc.guard_band_half + 1);
    return layout;
}

struct Candidate {
    int delay = 0;
    int alpha = 0;
    Eigen::MatrixXcd unit_matrix;  // DAFT-domain response of a unit path
};

struct DetectedPath {
    int delay = 0;
    int alpha = 0;
    cplx gain{0.0, 0.0};
};

// Pilot-window matched estimation: each integer-cell candidate moves the
// pilot to one known bin; pick every candidate whose observation clears the
// threshold.
std::vector<DetectedPath> estimate_paths(const CVec& daft_obs, const FdScenario& sc,
                                         const std::vector<Candidate>& candidates,
                                         int pilot_bin, double noise_var, double threshold_sigmas) {
    std::vector<DetectedPath> paths;
    const double threshold2 = threshold_sigmas * threshold_sigmas * noise_var;
    for (const auto& cand : candidates) {
        const int bin =
            (pilot_bin + daft_shift_of_path(sc.cfg, cand.delay, cand.alpha)) % sc.cfg.n;
        const cplx obs = daft_obs[static_cast<std::size_t>(bin)];
        if (std::norm(obs) < threshold2) continue;
        const cplx ref = sc.pilot_amplitude * cand.unit_matrix(bin, pilot_bin);
        if (std::abs(ref) < 1e-9) continue;
        DetectedPath p;
        p.delay = cand.delay;
        p.alpha = cand.alpha;
        p.gain = obs / ref;
        paths.push_back(p);
    }
    return paths;
}

LtvChannel to_channel(const std::vector<DetectedPath>& paths, int n) {
    LtvChannel ch;
    for (const auto& p : paths)
        ch.paths.push_back({p.gain, static_cast<double>(p.delay),
                            static_cast<double>(p.alpha) / n});
    return ch;
}

}  // namespace

FdReport simulate_fullduplex(const FdScenario& sc) {
    sc.cfg.validate();
    if (!sc.cfg.c1_exact)
        throw std::invalid_argument("fullduplex: c1 must be an exact ratio k/(2N)");
    const int n = sc.cfg.n;
    const int shift_span = static_cast<int>(sc.cfg.c1_num) * sc.max_delay + sc.max_alpha;
    // Data parked right beyond the guards shifts into the pilot window, so
    // the guards must cover twice the shift span.
    if (sc.guard_each_side < 2 * shift_span)
        throw std::invalid_argument(
            "fullduplex: own-pilot guards narrower than twice the channel shift span");
    if (sc.guard_band_half < 2 * shift_span)
        throw std::invalid_argument(
            "fullduplex: guard band cannot isolate the remote pilot window");
    if (cyclic_distance(sc.pilot_a, sc.pilot_b, n) <=
        sc.guard_band_half + sc.guard_each_side)
        throw std::invalid_argument("fullduplex: pilot regions overlap");
    if (sc.max_delay > sc.cfg.cpp_len)
        throw std::invalid_argument("fullduplex: delays must fit inside the prefix");

    const GridLayout layout_a = user_layout(sc, sc.pilot_a, sc.pilot_b);
    const GridLayout layout_b = user_layout(sc, sc.pilot_b, sc.pilot_a);
    const Constellation constellation = Constellation::from_name(sc.constellation);
    const int bps = constellation.bits_per_symbol();
    const auto data_idx_b = layout_b.indices(BinRole::data);
    const auto data_idx_a = layout_a.indices(BinRole::data);

    // Unit-path DAFT responses for every integer cell in the search range.
    std::vector<Candidate> candidates;
    for (int l = 0; l <= sc.max_delay; ++l) {
        for (int a = -sc.max_alpha; a <= sc.max_alpha; ++a) {
            Candidate c;
            c.delay = l;
            c.alpha = a;
            LtvChannel unit;
            unit.paths.push_back(
                {cplx{1.0, 0.0}, static_cast<double>(l), static_cast<double>(a) / n});
            c.unit_matrix = effective_matrix(unit, sc.cfg);
            candidates.push_back(std::move(c));
        }
    }
    auto candidate_matrix = [&](int delay, int alpha) -> const Eigen::MatrixXcd& {
        for (const auto& c : candidates)
            if (c.delay == delay && c.alpha == alpha) return c.unit_matrix;
        throw std::logic_error("fullduplex: candidate lookup failed");
    };

    // Floor keeps the MMSE regularization and detection thresholds usable at
    // the infinite-SNR sentinel.
    const double noise_var = std::max(std::pow(10.0, -sc.snr_db / 10.0), 1e-12);

    auto run_trial = [&](std::uint64_t trial, FdTrialRow& row) {
        Rng rng = Rng::stream(sc.seed, 0xFD, trial);

        // Random integer-cell channels.
        ChannelDrawOptions draw;
        draw.integer_doppler = true;
        draw.doppler_grid_n = n;
        // Sensing targets: fixed magnitude, random phase (the comm channel
        // below keeps Rayleigh gains).
        LtvChannel aa = random_channel(sc.aa_paths, sc.max_delay,
                                       static_cast<double>(sc.max_alpha) / n, rng, draw);
        for (auto& p : aa.paths) {
            const double mag = std::abs(p.gain);
            p.gain = mag > 0.0 ? p.gain / mag : cplx{1.0, 0.0};
            p.gain *= sc.aa_gain / std::sqrt(static_cast<double>(sc.aa_paths));
        }
        LtvChannel ba = random_channel(sc.ba_paths, sc.max_delay,
                                       static_cast<double>(sc.max_alpha) / n, rng, draw);
        for (auto& p : ba.paths) p.gain *= sc.ba_gain;

        // Per-symbol data grids for both users.
        std::vector<CVec> grids_a, grids_b;
        std::vector<std::uint8_t> bits_b_all;
        for (int s = 0; s < sc.m_symbols; ++s) {
            std::vector<std::uint8_t> bits_a(data_idx_a.size() * static_cast<std::size_t>(bps));
            for (auto& b : bits_a) b = rng.bit() ? 1 : 0;
            std::vector<std::uint8_t> bits_b(data_idx_b.size() * static_cast<std::size_t>(bps));
            for (auto& b : bits_b) b = rng.bit() ? 1 : 0;
            bits_b_all.insert(bits_b_all.end(), bits_b.begin(), bits_b.end());
            grids_a.push_back(
                build_grid(layout_a, constellation.map_bits(bits_a), cplx{sc.pilot_amplitude, 0.0})
                    .values);
            grids_b.push_back(
                build_grid(layout_b, constellation.map_bits(bits_b), cplx{sc.pilot_amplitude, 0.0})
                    .values);
        }
        const TimeFrame tx_a = modulate_symbols(grids_a, sc.cfg);
        const TimeFrame tx_b = modulate_symbols(grids_b, sc.cfg);

        const TimeFrame echo_true = apply_channel(tx_a, aa, ChannelMode::comm);
        const TimeFrame remote = apply_channel(tx_b, ba, ChannelMode::comm);
        CVec noise(tx_a.samples.size());
        for (auto& v : noise) v = rng.cgauss(noise_var);

        TimeFrame rx = tx_a;
        for (std::size_t i = 0; i < rx.samples.size(); ++i)
            rx.samples[i] = echo_true.samples[i] + remote.samples[i] + noise[i];
        TimeFrame rx_hd = tx_a;  // paired half-duplex observation, no echo
        for (std::size_t i = 0; i < rx_hd.samples.size(); ++i)
            rx_hd.samples[i] = remote.samples[i] + noise[i];

        // Receiver front end shared by both observations. With genie echo
        // knowledge the true echo is removed up front and the rest of the
        // pipeline runs unchanged, so a genie run and a half-duplex run see
        // the same code path on the same samples.
        auto receiver = [&](const TimeFrame& input, bool genie,
                            double* residual_db, double* delay_err, double* doppler_err)
            -> std::vector<std::uint8_t> {
            TimeFrame work = input;
            if (genie)
                for (std::size_t i = 0; i < work.samples.size(); ++i)
                    work.samples[i] -= echo_true.samples[i];
            const TimeFrame& baseline = genie ? work : input;  // echo-free reference input

            // Pass 1: pilot-window estimate of the echo channel, averaged
            // over symbols.
            std::vector<DetectedPath> aa_hat;
            {
                CVec mean_daft(static_cast<std::size_t>(n), cplx{0.0, 0.0});
                for (int s = 0; s < sc.m_symbols; ++s) {
                    const CVec y = daft(remove_cpp(work, sc.cfg, s), sc.cfg);
                    for (int i = 0; i < n; ++i) mean_daft[static_cast<std::size_t>(i)] += y[static_cast<std::size_t>(i)];
                }
                for (auto& v : mean_daft) v /= static_cast<double>(sc.m_symbols);
                aa_hat = estimate_paths(mean_daft, sc, candidates, sc.pilot_a,
                                        noise_var / sc.m_symbols, 3.0);
                if (!aa_hat.empty()) {
                    const TimeFrame recon =
                        apply_channel(tx_a, to_channel(aa_hat, n), ChannelMode::comm);
                    for (std::size_t i = 0; i < work.samples.size(); ++i)
                        work.samples[i] -= recon.samples[i];
                }
            }

            // Remote-pilot window estimation of the BA channel.
            CVec mean_daft_b(static_cast<std::size_t>(n), cplx{0.0, 0.0});
            for (int s = 0; s < sc.m_symbols; ++s) {
                const CVec y = daft(remove_cpp(work, sc.cfg, s), sc.cfg);
                for (int i = 0; i < n; ++i) mean_daft_b[static_cast<std::size_t>(i)] += y[static_cast<std::size_t>(i)];
            }
            for (auto& v : mean_daft_b) v /= static_cast<double>(sc.m_symbols);
            const auto ba_hat = estimate_paths(mean_daft_b, sc, candidates, sc.pilot_b,
                                               noise_var / sc.m_symbols, 3.0);

            Eigen::MatrixXcd m_ba = Eigen::MatrixXcd::Zero(n, n);
            for (const auto& p : ba_hat)
                m_ba += p.gain * candidate_matrix(p.delay, p.alpha);

            if (!aa_hat.empty()) {
                // Pass 2: detect the remote data, rebuild and remove the remote
                // signal, refit the echo gains on the cleaned frame by least
                // squares, and redo the subtraction.
                TimeFrame cleaned = baseline;
                {
                    Eigen::MatrixXcd mc(n, static_cast<int>(data_idx_b.size()));
                    for (std::size_t j = 0; j < data_idx_b.size(); ++j)
                        mc.col(static_cast<Eigen::Index>(j)) = m_ba.col(data_idx_b[j]);
                    if (!ba_hat.empty()) {
                        std::vector<CVec> remote_grids;
                        for (int s = 0; s < sc.m_symbols; ++s) {
                            const CVec y = daft(remove_cpp(work, sc.cfg, s), sc.cfg);
                            const auto bits = mmse_detect(y, mc, constellation, noise_var);
                            CVec data = constellation.map_bits(bits);
                            remote_grids.push_back(
                                build_grid(layout_b, data, cplx{sc.pilot_amplitude, 0.0}).values);
                        }
                        const TimeFrame remote_hat = apply_channel(
                            modulate_symbols(remote_grids, sc.cfg), to_channel(ba_hat, n),
                            ChannelMode::comm);
                        for (std::size_t i = 0; i < cleaned.samples.size(); ++i)
                            cleaned.samples[i] -= remote_hat.samples[i];
                    }
                }
                // Full-frame LS refit of the echo gains.
                const int np = static_cast<int>(aa_hat.size());
                Eigen::MatrixXcd t(static_cast<int>(tx_a.samples.size()), np);
                for (int j = 0; j < np; ++j) {
                    LtvChannel unit;
                    unit.paths.push_back({cplx{1.0, 0.0},
                                          static_cast<double>(aa_hat[static_cast<std::size_t>(j)].delay),
                                          static_cast<double>(aa_hat[static_cast<std::size_t>(j)].alpha) / n});
                    const TimeFrame tj = apply_channel(tx_a, unit, ChannelMode::comm);
                    for (std::size_t i = 0; i < tj.samples.size(); ++i)
                        t(static_cast<Eigen::Index>(i), j) = tj.samples[i];
                }
                Eigen::Map<const Eigen::VectorXcd> cv(cleaned.samples.data(),
                                                      static_cast<Eigen::Index>(cleaned.samples.size()));
                const Eigen::VectorXcd g =
                    (t.adjoint() * t).ldlt().solve(t.adjoint() * cv);
                for (int j = 0; j < np; ++j) aa_hat[static_cast<std::size_t>(j)].gain = g(j);
                const Eigen::VectorXcd echo_fit = t * g;
                work = baseline;
                for (std::size_t i = 0; i < work.samples.size(); ++i)
                    work.samples[i] -= echo_fit(static_cast<Eigen::Index>(i));
                // Refresh the BA estimate and detection input on the final
                // residual frame.
                CVec mean2(static_cast<std::size_t>(n), cplx{0.0, 0.0});
                for (int s = 0; s < sc.m_symbols; ++s) {
                    const CVec y = daft(remove_cpp(work, sc.cfg, s), sc.cfg);
                    for (int i = 0; i < n; ++i) mean2[static_cast<std::size_t>(i)] += y[static_cast<std::size_t>(i)];
                }
                for (auto& v : mean2) v /= static_cast<double>(sc.m_symbols);
                const auto ba2 = estimate_paths(mean2, sc, candidates, sc.pilot_b,
                                                noise_var / sc.m_symbols, 3.0);
                if (!ba2.empty()) {
                    m_ba.setZero();
                    for (const auto& p : ba2) m_ba += p.gain * candidate_matrix(p.delay, p.alpha);
                }
            }

            if (residual_db) {
                // In every mode `work` should reduce to remote + noise; the
                // rest is unsuppressed echo (or spuriously subtracted signal).
                const double echo_power = energy(echo_true.samples);
                if (echo_power > 0.0) {
                    double num = 0.0;
                    for (std::size_t i = 0; i < input.samples.size(); ++i)
                        num += std::norm(work.samples[i] - remote.samples[i] - noise[i]);
                    *residual_db = 10.0 * std::log10(std::max(num / echo_power, 1e-30));
                }
            }
            if (delay_err && doppler_err && !aa.paths.empty()) {
                // Strongest estimated path against the strongest true path.
                const DetectedPath* best = nullptr;
                for (const auto& p : aa_hat)
                    if (!best || std::abs(p.gain) > std::abs(best->gain)) best = &p;
                const PathEntry* truth = nullptr;
                for (const auto& p : aa.paths)
                    if (!truth || std::abs(p.gain) > std::abs(truth->gain)) truth = &p;
                if (best && truth) {
                    *delay_err = best->delay - truth->delay;
                    *doppler_err = best->alpha - truth->doppler * n;
                }
            }

            // MMSE detection of the remote data on the echo-free frame.
            Eigen::MatrixXcd mc(n, static_cast<int>(data_idx_b.size()));
            for (std::size_t j = 0; j < data_idx_b.size(); ++j)
                mc.col(static_cast<Eigen::Index>(j)) = m_ba.col(data_idx_b[j]);
            std::vector<std::uint8_t> bits_out;
            for (int s = 0; s < sc.m_symbols; ++s) {
                const CVec y = daft(remove_cpp(work, sc.cfg, s), sc.cfg);
                const auto bits = mmse_detect(y, mc, constellation, noise_var);
                bits_out.insert(bits_out.end(), bits.begin(), bits.end());
            }
            return bits_out;
        };

        double residual_db = -300.0, delay_err = 0.0, doppler_err = 0.0;
        const auto bits_fd =
            receiver(rx, sc.genie_aa, &residual_db, &delay_err, &doppler_err);
        const auto bits_hd = receiver(rx_hd, false, nullptr, nullptr, nullptr);

        row.bits = static_cast<long long>(bits_b_all.size());
        for (std::size_t i = 0; i < bits_b_all.size(); ++i) {
            row.errors_fd += bits_fd[i] != bits_b_all[i];
            row.errors_hd += bits_hd[i] != bits_b_all[i];
        }
        row.residual_db = residual_db;
        row.delay_err_cells = delay_err;
        row.doppler_err_cells = doppler_err;
    };

    FdReport report;
    report.trial_rows.resize(static_cast<std::size_t>(sc.trials));
    const int n_threads = std::max(1, sc.threads);
    std::atomic<int> cursor{0};
    auto pump = [&]() {
        while (true) {
            const int t = cursor.fetch_add(1);
            if (t >= sc.trials) return;
            run_trial(static_cast<std::uint64_t>(t), report.trial_rows[static_cast<std::size_t>(t)]);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(pump);
    pump();
    for (auto& th : pool) th.join();

    double residual_power = 0.0;
    double delay_sq = 0.0, doppler_sq = 0.0;
    for (const auto& row : report.trial_rows) {
        report.errors_remote += row.errors_fd;
        report.errors_halfduplex += row.errors_hd;
        report.bits += row.bits;
        residual_power += std::pow(10.0, row.residual_db / 10.0);
        delay_sq += row.delay_err_cells * row.delay_err_cells;
        doppler_sq += row.doppler_err_cells * row.doppler_err_cells;
    }
    report.ber_defined = sc.ba_gain != 0.0;
    report.ber_remote = report.bits ? static_cast<double>(report.errors_remote) / report.bits : 0.0;
    report.ber_halfduplex =
        report.bits ? static_cast<double>(report.errors_halfduplex) / report.bits : 0.0;
    report.mean_residual_db = 10.0 * std::log10(std::max(residual_power / sc.trials, 1e-30));
    report.sensing_delay_mse = delay_sq / sc.trials;
    report.sensing_doppler_mse = doppler_sq / sc.trials;

    report.config_echo["n"] = std::to_string(n);
    report.config_echo["c1_k"] = std::to_string(sc.cfg.c1_num);
    report.config_echo["cpp_len"] = std::to_string(sc.cfg.cpp_len);
    report.config_echo["pilot_a"] = std::to_string(sc.pilot_a);
    report.config_echo["pilot_b"] = std::to_string(sc.pilot_b);
    report.config_echo["guard_each_side"] = std::to_string(sc.guard_each_side);
    report.config_echo["guard_band_half"] = std::to_string(sc.guard_band_half);
    report.config_echo["constellation"] = sc.constellation;
    report.config_echo["aa_paths"] = std::to_string(sc.aa_paths);
    report.config_echo["ba_paths"] = std::to_string(sc.ba_paths);
    report.config_echo["aa_gain"] = std::to_string(sc.aa_gain);
    report.config_echo["snr_db"] = std::to_string(sc.snr_db);
    report.config_echo["m_symbols"] = std::to_string(sc.m_symbols);
    report.config_echo["trials"] = std::to_string(sc.trials);
    report.config_echo["seed"] = std::to_string(sc.seed);
    report.config_echo["genie_aa"] = sc.genie_aa ? "1" : "0";
    return report;
}

}  // namespace afdm
