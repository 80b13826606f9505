#include "afdm/crb.hpp"

#include "afdm/constellation.hpp"
#include "afdm/fft.hpp"
#include "afdm/rng.hpp"
#include "afdm/waveform.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace afdm {

namespace {

// Marginalized (tau, tau) and (nu, nu) entries of FIM^-1. The parameters
// carry wildly different units (s, Hz, amplitude), so equilibrate to a unit
// diagonal before inverting.
void invert_marginal(const Eigen::Matrix4d& fim, double& crb_delay, double& crb_doppler) {
    Eigen::Vector4d scale;
    for (int i = 0; i < 4; ++i) {
        if (!(fim(i, i) > 0.0))
            throw std::invalid_argument(
                "fim_for_signal: singular Fisher information (degenerate signal)");
        scale(i) = 1.0 / std::sqrt(fim(i, i));
    }
    const Eigen::Matrix4d balanced = scale.asDiagonal() * fim * scale.asDiagonal();
    Eigen::FullPivLU<Eigen::Matrix4d> lu(balanced);
    if (!lu.isInvertible())
        throw std::invalid_argument(
            "fim_for_signal: singular Fisher information (degenerate signal)");
    const Eigen::Matrix4d inv_balanced = lu.inverse();
    crb_delay = scale(0) * inv_balanced(0, 0) * scale(0);
    crb_doppler = scale(1) * inv_balanced(1, 1) * scale(1);
}

// Time derivative by spectral j 2 pi f multiplication.
CVec spectral_derivative(const CVec& x, double ts) {
    const int n = static_cast<int>(x.size());
    CVec spec = fft::fft(x);
    for (int k = 0; k < n; ++k) {
        const double f = ((k <= n / 2) ? k : k - n) / (n * ts);
        spec[static_cast<std::size_t>(k)] *= cplx{0.0, kTwoPi * f};
    }
    CVec out = fft::ifft(spec);
    const double s = 1.0 / n;
    for (auto& v : out) v *= s;
    return out;
}

}  // namespace

CrbSample fim_for_signal(const CVec& signal, double ts, const CrbTarget& target,
                         double snr_db, double reference_power) {
    const int raw = static_cast<int>(signal.size());
    if (raw == 0) throw std::invalid_argument("fim_for_signal: empty signal");
    const double shift = target.delay_s / ts;
    const int pad = static_cast<int>(std::ceil(std::abs(shift))) + 16;
    const int work = raw + 2 * pad;
    CVec buf(static_cast<std::size_t>(work), cplx{0.0, 0.0});
    for (int i = 0; i < raw; ++i) buf[static_cast<std::size_t>(pad + i)] = signal[static_cast<std::size_t>(i)];

    const CVec delayed = fractional_delay_circular(buf, shift);
    const CVec d_delayed = spectral_derivative(delayed, ts);

    // mu and the four parameter derivatives.
    CVec mu(static_cast<std::size_t>(work));
    CVec d_tau(static_cast<std::size_t>(work));
    CVec d_nu(static_cast<std::size_t>(work));
    CVec d_re(static_cast<std::size_t>(work));
    CVec d_im(static_cast<std::size_t>(work));
    // Time origin at the buffer midpoint: the marginalized bounds are
    // origin-invariant, but a centered axis keeps the Doppler and amplitude
    // rows near-orthogonal, which conditions the averaged-FIM inverse.
    const double t_center = 0.5 * work * ts;
    for (int i = 0; i < work; ++i) {
        const double t = static_cast<double>(i) * ts - t_center;
        const cplx carrier = std::polar(1.0, kTwoPi * target.doppler_hz * t);
        const cplx base = delayed[static_cast<std::size_t>(i)] * carrier;
        mu[static_cast<std::size_t>(i)] = target.amplitude * base;
        d_tau[static_cast<std::size_t>(i)] =
            -target.amplitude * d_delayed[static_cast<std::size_t>(i)] * carrier;
        d_nu[static_cast<std::size_t>(i)] =
            cplx{0.0, kTwoPi * t} * mu[static_cast<std::size_t>(i)];
        d_re[static_cast<std::size_t>(i)] = base;
        d_im[static_cast<std::size_t>(i)] = cplx{0.0, 1.0} * base;
    }

    const double mean_power =
        reference_power > 0.0 ? reference_power
                              : energy(mu) / raw;  // echo power per occupied sample
    const double sigma2 = mean_power / std::pow(10.0, snr_db / 10.0);

    const CVec* deriv[4] = {&d_tau, &d_nu, &d_re, &d_im};
    Eigen::Matrix4d fim;
    for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
            cplx acc{0.0, 0.0};
            const CVec& va = *deriv[a];
            const CVec& vb = *deriv[b];
            for (int i = 0; i < work; ++i)
                acc += std::conj(va[static_cast<std::size_t>(i)]) * vb[static_cast<std::size_t>(i)];
            fim(a, b) = 2.0 / sigma2 * acc.real();
            fim(b, a) = fim(a, b);
        }
    }

    CrbSample sample;
    sample.fim = fim;
    invert_marginal(fim, sample.crb_delay_s2, sample.crb_doppler_hz2);
    return sample;
}

CrbSample fim_crb_for_grid(const CrbConfig& cfg, const CVec& grid) {
    const TimeFrame shaped = pulse_shape(modulate(grid, cfg.cfg), cfg.rrc);
    // Fixed noise floor across the data ensemble: reference the nominal
    // frame energy of the layout (unit-energy symbols plus pilot, prefix
    // included), not this draw's realization.
    const double nominal_energy =
        (cfg.layout.count(BinRole::data) +
         (cfg.layout.pilot_index >= 0
              ? cfg.layout.pilot_amplitude * cfg.layout.pilot_amplitude
              : 0.0)) *
        (static_cast<double>(cfg.cfg.symbol_len()) / cfg.cfg.n);
    const double reference = std::norm(cfg.target.amplitude) * nominal_energy /
                             static_cast<double>(shaped.samples.size());
    return fim_for_signal(shaped.samples, shaped.sample_interval, cfg.target, cfg.snr_db,
                          reference);
}

CrbReport fim_crb(const CrbConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("fim_crb: trials must be positive");
    const Constellation constellation = Constellation::from_name(cfg.constellation);
    const auto data_indices = cfg.layout.indices(BinRole::data);
    const int bits_per_trial =
        static_cast<int>(data_indices.size()) * constellation.bits_per_symbol();

    constexpr int kSlabs = 8;
    struct Slab {
        Eigen::Matrix4d fim = Eigen::Matrix4d::Zero();
        double delay = 0.0, doppler = 0.0;
    };
    std::vector<Slab> slabs(kSlabs);
    auto worker = [&](int slab) {
        for (int trial = slab; trial < cfg.trials; trial += kSlabs) {
            Rng rng = Rng::stream(cfg.seed, 0xC4B, static_cast<std::uint64_t>(trial));
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(bits_per_trial));
            for (auto& b : bits) b = rng.bit() ? 1 : 0;
            const CVec data = constellation.map_bits(bits);
            const cplx pilot = cfg.layout.pilot_index >= 0
                                   ? cplx{cfg.layout.pilot_amplitude, 0.0}
                                   : cplx{0.0, 0.0};
            const DaftGrid grid = build_grid(cfg.layout, data, pilot);
            const CrbSample s = fim_crb_for_grid(cfg, grid.values);
            auto& out = slabs[static_cast<std::size_t>(slab)];
            out.fim += s.fim;
            out.delay += s.crb_delay_s2;
            out.doppler += s.crb_doppler_hz2;
        }
    };
    const int n_threads = std::max(1, cfg.threads);
    if (n_threads == 1) {
        for (int slab = 0; slab < kSlabs; ++slab) worker(slab);
    } else {
        std::atomic<int> cursor{0};
        auto pump = [&]() {
            while (true) {
                const int slab = cursor.fetch_add(1);
                if (slab >= kSlabs) return;
                worker(slab);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < n_threads; ++t) pool.emplace_back(pump);
        pump();
        for (auto& th : pool) th.join();
    }

    CrbReport report;
    report.fim = Eigen::Matrix4d::Zero();
    for (const auto& s : slabs) {
        report.fim += s.fim;
        report.crb_delay_s2 += s.delay;
        report.crb_doppler_hz2 += s.doppler;
    }
    report.fim /= static_cast<double>(cfg.trials);
    report.crb_delay_s2 /= static_cast<double>(cfg.trials);
    report.crb_doppler_hz2 /= static_cast<double>(cfg.trials);
    report.crb_distance_m2 = kSpeedOfLight * kSpeedOfLight * report.crb_delay_s2;
    const double v_per_hz = kSpeedOfLight / (2.0 * cfg.carrier_hz);
    report.crb_velocity_ms2 = v_per_hz * v_per_hz * report.crb_doppler_hz2;
    invert_marginal(report.fim, report.ergodic_crb_delay_s2, report.ergodic_crb_doppler_hz2);
    report.ergodic_crb_distance_m2 =
        kSpeedOfLight * kSpeedOfLight * report.ergodic_crb_delay_s2;
    report.ergodic_crb_velocity_ms2 = v_per_hz * v_per_hz * report.ergodic_crb_doppler_hz2;

    std::ostringstream c1;
    c1 << cfg.cfg.c1;
    report.config_echo["n"] = std::to_string(cfg.cfg.n);
    report.config_echo["c1"] = c1.str();
    report.config_echo["c2"] = std::to_string(cfg.cfg.c2);
    report.config_echo["sample_interval_s"] = std::to_string(cfg.cfg.sample_interval);
    report.config_echo["cpp_len"] = std::to_string(cfg.cfg.cpp_len);
    report.config_echo["constellation"] = constellation.name();
    report.config_echo["snr_db"] = std::to_string(cfg.snr_db);
    report.config_echo["carrier_hz"] = std::to_string(cfg.carrier_hz);
    report.config_echo["target_delay_s"] = std::to_string(cfg.target.delay_s);
    report.config_echo["target_doppler_hz"] = std::to_string(cfg.target.doppler_hz);
    report.config_echo["trials"] = std::to_string(cfg.trials);
    report.config_echo["seed"] = std::to_string(cfg.seed);
    report.config_echo["rrc_beta"] = std::to_string(cfg.rrc.beta);
    report.config_echo["rrc_span"] = std::to_string(cfg.rrc.span_symbols);
    report.config_echo["rrc_osf"] = std::to_string(cfg.rrc.osf);
    report.config_echo["distance_convention"] = "round-trip R = c*tau";
    report.config_echo["velocity_convention"] = "monostatic nu = 2 v fc / c";
    return report;
}

}  // namespace afdm
