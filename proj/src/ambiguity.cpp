#include "afdm/ambiguity.hpp"

#include "afdm/constellation.hpp"
#include "afdm/waveform.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace afdm {

namespace {

void check_axis(const std::vector<double>& axis, const char* what) {
    if (axis.empty()) throw std::invalid_argument(std::string(what) + " axis is empty");
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (axis[i] <= axis[i - 1])
            throw std::invalid_argument(std::string(what) + " axis must be strictly increasing");
}

Fraction reduced(long long num, long long den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    return Fraction{g ? num / g : num, g ? den / g : den};
}

}  // namespace

AmbiguitySurface ambiguity_function(const TimeFrame& frame,
                                    const std::vector<double>& delay_s,
                                    const std::vector<double>& doppler_hz) {
    check_axis(delay_s, "delay");
    check_axis(doppler_hz, "doppler");
    const double ts = frame.sample_interval;
    const double duration = frame.duration();
    const double max_delay = std::max(std::abs(delay_s.front()), std::abs(delay_s.back()));
    const double max_dopp = std::max(std::abs(doppler_hz.front()), std::abs(doppler_hz.back()));
    if (max_delay > duration / 2.0)
        throw std::invalid_argument("ambiguity_function: delay grid exceeds half the frame");
    if (max_dopp > 0.5 / ts + 1e-12)
        throw std::invalid_argument("ambiguity_function: Doppler grid exceeds half the rate");

    const int len = static_cast<int>(frame.samples.size());
    const int pad = static_cast<int>(std::ceil(max_delay / ts)) + 8;
    const int work = len + 2 * pad;
    CVec padded(static_cast<std::size_t>(work), cplx{0.0, 0.0});
    for (int i = 0; i < len; ++i)
        padded[static_cast<std::size_t>(pad + i)] = frame.samples[static_cast<std::size_t>(i)];

    const int n_delay = static_cast<int>(delay_s.size());
    const int n_dopp = static_cast<int>(doppler_hz.size());

    // Lag products, one row per delay.
    Eigen::MatrixXcd products(n_delay, work);
    for (int d = 0; d < n_delay; ++d) {
        const double shift = delay_s[static_cast<std::size_t>(d)] / ts;
        const double rounded = std::round(shift);
        CVec shifted;
        if (std::abs(shift - rounded) < 1e-12) {
            // Integer shifts avoid interpolation entirely.
            const int s = static_cast<int>(rounded);
            shifted.assign(static_cast<std::size_t>(work), cplx{0.0, 0.0});
            for (int i = 0; i < work; ++i) {
                const int src = ((i - s) % work + work) % work;
                shifted[static_cast<std::size_t>(i)] = padded[static_cast<std::size_t>(src)];
            }
        } else {
            shifted = fractional_delay_circular(padded, shift);
        }
        for (int i = 0; i < work; ++i)
            products(d, i) = padded[static_cast<std::size_t>(i)] *
                             std::conj(shifted[static_cast<std::size_t>(i)]);
    }

    // Doppler probe matrix E(i, j) = exp(-j 2 pi nu_j t_i), t referenced to the
    // frame start.
    Eigen::MatrixXcd probes(work, n_dopp);
    for (int j = 0; j < n_dopp; ++j) {
        const double step = -kTwoPi * doppler_hz[static_cast<std::size_t>(j)] * ts;
        const cplx rot = std::polar(1.0, step);
        cplx acc = std::polar(1.0, step * static_cast<double>(-pad));
        for (int i = 0; i < work; ++i) {
            probes(i, j) = acc;
            acc *= rot;
        }
    }

    AmbiguitySurface surface;
    surface.delay_axis = delay_s;
    surface.doppler_axis = doppler_hz;
    surface.values = products * probes;
    surface.frame_energy = energy(frame.samples);
    return surface;
}

std::vector<std::pair<double, double>> UnambiguityRegion::replica_peaks(
    double max_delay, double max_doppler) const {
    std::vector<std::pair<double, double>> peaks;
    const double slope = g1_doppler.value();
    const int a_max = static_cast<int>(std::floor(max_delay));
    for (int a = -a_max; a <= a_max; ++a) {
        const double base = slope * a;
        const int b_lo = static_cast<int>(std::ceil(-max_doppler - base));
        const int b_hi = static_cast<int>(std::floor(max_doppler - base));
        for (int b = b_lo; b <= b_hi; ++b)
            peaks.emplace_back(static_cast<double>(a), base + b);
    }
    return peaks;
}

UnambiguityRegion unambiguity_parallelogram(const ChirpConfig& cfg) {
    cfg.validate();
    if (!cfg.c1_exact)
        throw std::invalid_argument(
            "unambiguity_parallelogram: defined for integer 2N*c1 only");
    UnambiguityRegion region;
    region.g1_delay = Fraction{1, 1};
    region.g1_doppler = reduced(cfg.c1_num, cfg.n);
    region.g2_delay = Fraction{0, 1};
    region.g2_doppler = Fraction{1, 1};
    // |cross(g1, g2)| in exact integers.
    const long long cross_num = region.g1_delay.num * region.g2_doppler.num *
                                    region.g1_doppler.den * region.g2_delay.den -
                                region.g1_doppler.num * region.g2_delay.num *
                                    region.g1_delay.den * region.g2_doppler.den;
    const long long cross_den = region.g1_delay.den * region.g2_doppler.den *
                                region.g1_doppler.den * region.g2_delay.den;
    region.area = reduced(cross_num < 0 ? -cross_num : cross_num, cross_den);
    const double g1d = region.g1_delay.value(), g1v = region.g1_doppler.value();
    const double g2d = region.g2_delay.value(), g2v = region.g2_doppler.value();
    region.vertices = {{{{(g1d + g2d) / 2.0, (g1v + g2v) / 2.0}},
                        {{(g1d - g2d) / 2.0, (g1v - g2v) / 2.0}},
                        {{-(g1d + g2d) / 2.0, -(g1v + g2v) / 2.0}},
                        {{-(g1d - g2d) / 2.0, -(g1v - g2v) / 2.0}}}};
    return region;
}

AmbiguitySurface expected_squared_af(const ExpectedAfConfig& cfg) {
    if (cfg.trials < 50)
        throw std::invalid_argument("expected_squared_af: needs at least 50 trials");
    const Constellation constellation = Constellation::from_name(cfg.constellation);
    const auto data_indices = cfg.layout.indices(BinRole::data);
    const int bits_per_trial =
        static_cast<int>(data_indices.size()) * constellation.bits_per_symbol();

    auto run_trial = [&](int trial) {
        Rng rng = Rng::stream(cfg.seed, 0xAF, static_cast<std::uint64_t>(trial));
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(bits_per_trial));
        for (auto& b : bits) b = rng.bit() ? 1 : 0;
        const CVec data = constellation.map_bits(bits);
        const cplx pilot = cfg.layout.pilot_index >= 0
                               ? cplx{cfg.layout.pilot_amplitude, 0.0}
                               : cplx{0.0, 0.0};
        const DaftGrid grid = build_grid(cfg.layout, data, pilot);
        const TimeFrame shaped = pulse_shape(modulate(grid, cfg.cfg), cfg.rrc);
        return ambiguity_function(shaped, cfg.delay_s, cfg.doppler_hz);
    };

    // Fixed slab assignment (trial mod 8) keeps the accumulation order, and
    // therefore the bytes of the result, independent of the thread count.
    constexpr int kSlabs = 8;
    std::vector<Eigen::MatrixXd> slabs(
        kSlabs, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.delay_s.size()),
                                      static_cast<Eigen::Index>(cfg.doppler_hz.size())));
    double energy_sum = 0.0;
    const int n_threads = std::max(1, cfg.threads);
    std::vector<double> slab_energy(kSlabs, 0.0);
    auto worker = [&](int slab) {
        for (int trial = slab; trial < cfg.trials; trial += kSlabs) {
            const AmbiguitySurface s = run_trial(trial);
            slabs[static_cast<std::size_t>(slab)] += s.values.cwiseAbs2();
            slab_energy[static_cast<std::size_t>(slab)] += s.frame_energy;
        }
    };
    if (n_threads == 1) {
        for (int slab = 0; slab < kSlabs; ++slab) worker(slab);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> cursor{0};
        auto pump = [&]() {
            while (true) {
                const int slab = cursor.fetch_add(1);
                if (slab >= kSlabs) return;
                worker(slab);
            }
        };
        for (int t = 1; t < n_threads; ++t) pool.emplace_back(pump);
        pump();
        for (auto& th : pool) th.join();
    }

    AmbiguitySurface mean;
    mean.delay_axis = cfg.delay_s;
    mean.doppler_axis = cfg.doppler_hz;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(cfg.delay_s.size()),
        static_cast<Eigen::Index>(cfg.doppler_hz.size()));
    for (int slab = 0; slab < kSlabs; ++slab) {
        acc += slabs[static_cast<std::size_t>(slab)];
        energy_sum += slab_energy[static_cast<std::size_t>(slab)];
    }
    acc /= static_cast<double>(cfg.trials);
    mean.values = acc.cast<cplx>();
    mean.magnitude_squared = true;
    mean.frame_energy = energy_sum / cfg.trials;
    return mean;
}

}  // namespace afdm
