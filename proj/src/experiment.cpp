#include "afdm/experiment.hpp"

#include "afdm/ambiguity.hpp"
#include "afdm/ber.hpp"
#include "afdm/channel.hpp"
#include "afdm/constellation.hpp"
#include "afdm/crb.hpp"
#include "afdm/csv.hpp"
#include "afdm/dechirp.hpp"
#include "afdm/fft.hpp"
#include "afdm/detect.hpp"
#include "afdm/fullduplex.hpp"
#include "afdm/mf.hpp"
#include "afdm/pulse.hpp"
#include "afdm/transforms.hpp"
#include "afdm/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace afdm {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> make_axis(double lo, double hi, double step, const std::string& key) {
    if (step <= 0.0) throw ConfigError(key + ": step must be positive");
    if (hi < lo) throw ConfigError(key + ": max below min");
    std::vector<double> axis;
    for (double v = lo; v <= hi + step * 1e-9; v += step) axis.push_back(v);
    return axis;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.raw_[key] = value;
        cfg.consumed_[key] = false;
    }
    return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    raw_[key] = value;
    consumed_[key] = false;
}

std::string KeyValueConfig::take(const std::string& key, const std::string& fallback) {
    std::string value = fallback;
    const auto it = raw_.find(key);
    if (it != raw_.end()) {
        value = it->second;
        consumed_[key] = true;
    }
    if (ephemeral_.find(key) == ephemeral_.end()) effective_[key] = value;
    return value;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) {
    return take(key, fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
    const std::string v = take(key, fmt_double(fallback));
    try {
        std::size_t pos = 0;
        const double parsed = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + v + "'");
    }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) {
    const std::string v = take(key, std::to_string(fallback));
    try {
        std::size_t pos = 0;
        const long parsed = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return static_cast<int>(parsed);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + v + "'");
    }
}

long long KeyValueConfig::get_llong(const std::string& key, long long fallback) {
    const std::string v = take(key, std::to_string(fallback));
    try {
        std::size_t pos = 0;
        const long long parsed = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + v + "'");
    }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) {
    const std::string v = take(key, std::to_string(fallback));
    try {
        std::size_t pos = 0;
        const unsigned long long parsed = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
    const std::string v = take(key, fallback ? "1" : "0");
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError(key + ": expected a boolean (0/1): '" + v + "'");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::string& fallback_csv) {
    const std::string v = take(key, fallback_csv);
    std::vector<double> out;
    for (const auto& item : split_csv(v)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError(key + ": not a number: '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(const std::string& key,
                                                         const std::string& fallback_csv) {
    const auto out = split_csv(take(key, fallback_csv));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

void KeyValueConfig::finish() const {
    for (const auto& [key, used] : consumed_) {
        if (!used) throw ConfigError("unknown config key: " + key);
    }
}

namespace {

int run_ber_experiment(KeyValueConfig& cfg, const std::string& out, std::ostream& log) {
    BerConfig base;
    base.n = cfg.get_int("n", 12);
    base.cpp_len = cfg.get_int("cpp_len", 2);
    base.afdm_k = cfg.get_llong("afdm_k", -1);
    base.c2 = cfg.get_double("c2", 0.0);
    base.constellation = cfg.get_string("constellation", "bpsk");
    base.n_paths = cfg.get_int("n_paths", 4);
    base.max_delay = cfg.get_double("max_delay", 2.0);
    base.max_doppler = cfg.get_double("max_doppler", 1.0 / base.n);
    base.integer_doppler = cfg.get_bool("integer_doppler", true);
    base.snr_db = cfg.get_double_list("snr_db", "0,3,6,9,12,15");
    base.target_errors = cfg.get_llong("target_errors", 200);
    base.max_trials = cfg.get_llong("max_trials", 4000000);
    const std::string detector = cfg.get_string("detector", "ml");
    if (detector == "ml") {
        base.detector = BerConfig::Detector::ml;
    } else if (detector == "mmse") {
        base.detector = BerConfig::Detector::mmse;
    } else {
        throw ConfigError("detector: expected ml or mmse");
    }
    base.seed = cfg.get_u64("seed", 1);
    base.threads = cfg.get_int("threads", 1);
    const auto waveforms = cfg.get_string_list("waveforms", "ofdm,ocdm,afdm");
    cfg.finish();

    for (const auto& name : waveforms) {
        BerConfig wcfg = base;
        if (name == "ofdm") {
            wcfg.waveform = WaveformKind::ofdm;
        } else if (name == "ocdm") {
            wcfg.waveform = WaveformKind::ocdm;
        } else if (name == "afdm") {
            wcfg.waveform = WaveformKind::afdm;
        } else {
            throw ConfigError("waveforms: unknown waveform '" + name + "'");
        }
        const BerCurve curve = run_ber(wcfg);
        write_ber_csv(out + "/ber_" + name + ".csv", curve);
        log << "ber: wrote ber_" << name << ".csv (" << curve.points.size()
            << " points)\n";
    }
    write_config_echo(out + "/ber.echo.cfg", cfg.effective());
    return 0;
}

int run_af_experiment(KeyValueConfig& cfg, const std::string& out, std::ostream& log) {
    const int n = cfg.get_int("n", 128);
    const long k = cfg.get_llong("k", 9);
    const double c2 = cfg.get_double("c2", 0.0);
    const int cpp_len = cfg.get_int("cpp_len", 0);
    const int pilot_bin = cfg.get_int("pilot_bin", 0);
    const int osf = cfg.get_int("osf", 1);
    const double dmin = cfg.get_double("delay_min", -40.0);
    const double dmax = cfg.get_double("delay_max", 40.0);
    const double dstep = cfg.get_double("delay_step", 1.0);
    const double vmin = cfg.get_double("doppler_min", -0.125);
    const double vmax = cfg.get_double("doppler_max", 0.125);
    const double vstep = cfg.get_double("doppler_step", 1.0 / 1024.0);
    const double rrc_beta = cfg.get_double("rrc_beta", 0.25);
    const int rrc_span = cfg.get_int("rrc_span", 24);
    cfg.finish();

    // Normalized units: sample interval 1 s, so delays are in samples and
    // Dopplers in cycles/sample.
    const auto chirp = ChirpConfig::from_ratio(n, k, c2, 1.0, cpp_len);
    const auto grid = build_grid(GridLayout::point_pilot(n, pilot_bin), {}, cplx{1.0, 0.0});
    TimeFrame frame = modulate(grid, chirp);
    if (osf > 1) {
        RrcConfig rrc{rrc_beta, rrc_span, osf};
        frame = pulse_shape(frame, rrc);
    }
    const auto delays = make_axis(dmin, dmax, dstep, "delay");
    const auto dopplers = make_axis(vmin, vmax, vstep, "doppler");
    const AmbiguitySurface surface = ambiguity_function(frame, delays, dopplers);
    write_surface_csv(out + "/af.csv", surface);

    const UnambiguityRegion region = unambiguity_parallelogram(chirp);
    std::vector<std::string> lines;
    lines.push_back("kind,delay_samples,doppler_cps");
    lines.push_back("generator," + fmt_double(region.g1_delay.value()) + "," +
                    fmt_double(region.g1_doppler.value()));
    lines.push_back("generator," + fmt_double(region.g2_delay.value()) + "," +
                    fmt_double(region.g2_doppler.value()));
    for (const auto& v : region.vertices)
        lines.push_back("vertex," + fmt_double(v[0]) + "," + fmt_double(v[1]));
    for (const auto& [pd, pv] :
         region.replica_peaks(std::max(std::abs(dmin), std::abs(dmax)),
                              std::max(std::abs(vmin), std::abs(vmax))))
        lines.push_back("replica," + fmt_double(pd) + "," + fmt_double(pv));
    lines.push_back("area," + std::to_string(region.area.num) + "/" +
                    std::to_string(region.area.den) + ",");
    write_lines(out + "/af_lattice.csv", lines);
    write_config_echo(out + "/af.echo.cfg", cfg.effective());
    log << "af: wrote af.csv (" << delays.size() << "x" << dopplers.size()
        << "), af_lattice.csv\n";
    return 0;
}

int run_af_expected_experiment(KeyValueConfig& cfg, const std::string& out,
                               std::ostream& log) {
    ExpectedAfConfig ecfg;
    const int n = cfg.get_int("n", 128);
    const long k = cfg.get_llong("k", 8);
    const double c2 = cfg.get_double("c2", 0.0);
    const int cpp_len = cfg.get_int("cpp_len", 16);
    ecfg.cfg = ChirpConfig::from_ratio(n, k, c2, 1.0, cpp_len);
    ecfg.layout = GridLayout::all_data(n);
    ecfg.constellation = cfg.get_string("constellation", "16qam");
    ecfg.rrc.beta = cfg.get_double("rrc_beta", 0.25);
    ecfg.rrc.span_symbols = cfg.get_int("rrc_span", 24);
    ecfg.rrc.osf = cfg.get_int("rrc_osf", 8);
    ecfg.trials = cfg.get_int("trials", 100);
    ecfg.seed = cfg.get_u64("seed", 1);
    ecfg.threads = cfg.get_int("threads", 1);
    const double dmin = cfg.get_double("delay_min", -24.0);
    const double dmax = cfg.get_double("delay_max", 24.0);
    const double dstep = cfg.get_double("delay_step", 0.5);
    const double vmin = cfg.get_double("doppler_min", -0.25);
    const double vmax = cfg.get_double("doppler_max", 0.25);
    const double vstep = cfg.get_double("doppler_step", 1.0 / 256.0);
    cfg.finish();
    ecfg.delay_s = make_axis(dmin, dmax, dstep, "delay");
    ecfg.doppler_hz = make_axis(vmin, vmax, vstep, "doppler");

    const AmbiguitySurface surface = expected_squared_af(ecfg);
    write_surface_csv(out + "/af_expected.csv", surface);
    write_config_echo(out + "/af-expected.echo.cfg", cfg.effective());
    log << "af-expected: wrote af_expected.csv over " << ecfg.trials << " draws\n";
    return 0;
}

int run_crb_experiment(KeyValueConfig& cfg, const std::string& out, std::ostream& log) {
    CrbConfig base;
    const int n = cfg.get_int("n", 128);
    const double dt = cfg.get_double("dt_us", 0.78) * 1e-6;
    base.carrier_hz = cfg.get_double("fc_ghz", 60.0) * 1e9;
    base.snr_db = cfg.get_double("snr_db", 10.0);
    base.constellation = cfg.get_string("constellation", "qpsk");
    base.trials = cfg.get_int("trials", 1000);
    base.seed = cfg.get_u64("seed", 1);
    base.threads = cfg.get_int("threads", 1);
    base.rrc.beta = cfg.get_double("rrc_beta", 0.25);
    base.rrc.span_symbols = cfg.get_int("rrc_span", 24);
    base.rrc.osf = cfg.get_int("rrc_osf", 8);
    const int cpp_len = cfg.get_int("cpp_len", 16);
    const double distance_m = cfg.get_double("distance_m", 1000.0);  // round trip
    const double velocity_kmh = cfg.get_double("velocity_kmh", 300.0);
    base.target.delay_s = distance_m / kSpeedOfLight;
    base.target.doppler_hz = 2.0 * (velocity_kmh / 3.6) * base.carrier_hz / kSpeedOfLight;
    base.layout = GridLayout::all_data(n);
    const auto k_list = cfg.get_double_list("c1_k_list", "1,3,5,7,9");
    std::string c2_default;
    for (int j = 0; j < 5; ++j)
        c2_default += (j ? "," : "") + fmt_double(j / (4.0 * n));
    const auto c2_list = cfg.get_double_list("c2_list", c2_default);
    const bool include_ofdm = cfg.get_bool("include_ofdm", true);
    const bool include_ocdm = cfg.get_bool("include_ocdm", true);
    cfg.finish();

    std::vector<std::string> lines;
    lines.push_back(
        "label,c1_k,c2,crb_delay_s2,crb_doppler_hz2,crb_distance_m2,crb_velocity_ms2,"
        "ergodic_crb_distance_m2,ergodic_crb_velocity_ms2");
    auto run_one = [&](const std::string& label, long k, double c2) {
        CrbConfig ccfg = base;
        ccfg.cfg = ChirpConfig::from_ratio(n, k, c2, dt, cpp_len);
        const CrbReport report = fim_crb(ccfg);
        lines.push_back(label + "," + std::to_string(k) + "," + fmt_double(c2) + "," +
                        fmt_double(report.crb_delay_s2) + "," +
                        fmt_double(report.crb_doppler_hz2) + "," +
                        fmt_double(report.crb_distance_m2) + "," +
                        fmt_double(report.crb_velocity_ms2) + "," +
                        fmt_double(report.ergodic_crb_distance_m2) + "," +
                        fmt_double(report.ergodic_crb_velocity_ms2));
    };
    if (include_ofdm) run_one("ofdm", 0, 0.0);
    if (include_ocdm) run_one("ocdm", 1, 1.0 / (2.0 * n));
    for (const double kd : k_list)
        for (const double c2 : c2_list) run_one("afdm", static_cast<long>(kd), c2);
    write_lines(out + "/crb.csv", lines);
    write_config_echo(out + "/crb.echo.cfg", cfg.effective());
    log << "crb: wrote crb.csv (" << lines.size() - 1 << " configurations)\n";
    return 0;
}

int run_mf_experiment(KeyValueConfig& cfg, const std::string& out, std::ostream& log) {
    const int n = cfg.get_int("n", 64);
    const long k = cfg.get_llong("k", 3);
    const double c2 = cfg.get_double("c2", 0.1);
    const int cpp_len = cfg.get_int("cpp_len", 8);
    const int m_symbols = cfg.get_int("m_symbols", 2);
    const std::string constellation_name = cfg.get_string("constellation", "qpsk");
    const double target_delay = cfg.get_double("target_delay", 3.0);  // samples
    const double target_doppler = cfg.get_double("target_doppler", 0.01);
    const double snr_db = cfg.get_double("snr_db", 20.0);
    const std::string domain = cfg.get_string("domain", "both");
    const double dmin = cfg.get_double("delay_min", 0.0);
    const double dmax = cfg.get_double("delay_max", 8.0);
    const double dstep = cfg.get_double("delay_step", 1.0);
    const double vmin = cfg.get_double("doppler_min", -3.0 / n);
    const double vmax = cfg.get_double("doppler_max", 3.0 / n);
    const double vstep = cfg.get_double("doppler_step", 1.0 / n);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    cfg.finish();

    const auto chirp = ChirpConfig::from_ratio(n, k, c2, 1.0, cpp_len);
    Rng rng(seed);
    const auto constellation = Constellation::from_name(constellation_name);
    std::vector<CVec> grids;
    for (int s = 0; s < m_symbols; ++s) {
        std::vector<std::uint8_t> bits(
            static_cast<std::size_t>(n * constellation.bits_per_symbol()));
        for (auto& b : bits) b = rng.bit() ? 1 : 0;
        grids.push_back(constellation.map_bits(bits));
    }
    const TimeFrame tx = modulate_symbols(grids, chirp);
    LtvChannel target;
    target.paths.push_back({cplx{1.0, 0.0}, target_delay, target_doppler});
    TimeFrame rx = apply_channel(tx, target,
                                 std::abs(target_delay - std::round(target_delay)) < 1e-9
                                     ? ChannelMode::comm
                                     : ChannelMode::sensing);
    rx = add_awgn(rx, snr_db, rng);

    const auto delays = make_axis(dmin, dmax, dstep, "delay");
    const auto dopplers = make_axis(vmin, vmax, vstep, "doppler");

    std::vector<std::string> estimates;
    estimates.push_back("domain,delay_hat,doppler_hat,peak,outside_unambiguous");
    MatchedFilterResult time_result, daft_result;
    const bool want_time = domain == "time" || domain == "both";
    const bool want_daft = domain == "daft" || domain == "both";
    if (!want_time && !want_daft) throw ConfigError("domain: expected time, daft or both");
    if (want_time) {
        time_result = matched_filter(rx, tx, chirp, MfDomain::time, delays, dopplers);
        write_surface_csv(out + "/mf_time.csv", time_result.surface);
        estimates.push_back("time," + fmt_double(time_result.estimate.delay_s) + "," +
                            fmt_double(time_result.estimate.doppler_hz) + "," +
                            fmt_double(time_result.estimate.peak_magnitude) + "," +
                            (time_result.estimate.outside_unambiguous ? "1" : "0"));
    }
    if (want_daft) {
        daft_result = matched_filter(rx, tx, chirp, MfDomain::daft, delays, dopplers);
        write_surface_csv(out + "/mf_daft.csv", daft_result.surface);
        estimates.push_back("daft," + fmt_double(daft_result.estimate.delay_s) + "," +
                            fmt_double(daft_result.estimate.doppler_hz) + "," +
                            fmt_double(daft_result.estimate.peak_magnitude) + "," +
                            (daft_result.estimate.outside_unambiguous ? "1" : "0"));
    }
    if (want_time && want_daft) {
        const double scale = time_result.surface.values.cwiseAbs().maxCoeff();
        const double diff =
            (time_result.surface.values - daft_result.surface.values).cwiseAbs().maxCoeff();
        estimates.push_back("domain_max_rel_diff," + fmt_double(diff / scale) + ",,,");
        log << "mf: time/daft max relative difference " << diff / scale << "\n";
    }
    write_lines(out + "/mf_estimates.csv", estimates);
    write_config_echo(out + "/mf.echo.cfg", cfg.effective());
    return 0;
}

int run_dechirp_experiment(KeyValueConfig& cfg, const std::string& out, std::ostream& log) {
    const int n = cfg.get_int("n", 128);
    const long k = cfg.get_llong("k", 2);
    const int cpp_len = cfg.get_int("cpp_len", 16);
    const int pilot_bin = cfg.get_int("pilot_bin", 64);
    const int guard = cfg.get_int("guard_each_side", 26);
    const int m_symbols = cfg.get_int("m_symbols", 32);
    const int trials = cfg.get_int("trials", 200);
    const double si_amplitude = cfg.get_double("si_amplitude", 30.0);
    const double echo_gain = cfg.get_double("echo_gain", 0.1);
    const double delay_min = cfg.get_double("delay_min", 1.0);
    const double delay_max = cfg.get_double("delay_max", 4.0);
    const double slow_nyquist = 0.5 / (n + cpp_len);
    const double max_doppler = cfg.get_double("max_doppler", 0.6 * slow_nyquist);
    const double snr_db = cfg.get_double("snr_db", 10.0);
    DechirpDsp dsp;
    dsp.decimation = cfg.get_int("decimation", 4);
    dsp.lowpass_cutoff = cfg.get_double("lowpass_cutoff", 0.0);
    dsp.fir_taps = cfg.get_int("fir_taps", 0);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    cfg.finish();

    const auto chirp = ChirpConfig::from_ratio(n, k, 0.0, 1.0, cpp_len);
    const auto layout = GridLayout::embedded_pilot(n, pilot_bin, guard);
    const DechirpPipeline pipe(chirp, layout, dsp, delay_max, max_doppler);

    std::vector<std::string> lines;
    lines.push_back(
        "trial,true_delay,true_doppler,delay_hat,doppler_hat,delay_err_bins,doppler_err_bins");
    int within = 0;
    double si_db = -300.0, leak_db = -300.0;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng = Rng::stream(seed, 0xDC, static_cast<std::uint64_t>(trial));
        DechirpScenario sc;
        sc.m_symbols = m_symbols;
        sc.si_amplitude = si_amplitude;
        sc.echo_gain = std::polar(echo_gain, rng.uniform(0.0, kTwoPi));
        sc.target_delay = rng.uniform(delay_min, delay_max);
        sc.target_doppler = rng.uniform(-max_doppler, max_doppler);
        sc.snr_db = snr_db;
        const DechirpResult r = pipe.run_scenario(sc, rng);
        const double derr = (r.estimate.delay_s - sc.target_delay) / r.delay_bin_s;
        const double verr = (r.estimate.doppler_hz - sc.target_doppler) / r.doppler_bin_hz;
        if (std::abs(derr) <= 0.5 && std::abs(verr) <= 0.5) ++within;
        si_db = std::max(si_db, r.diag.si_residual_db);
        leak_db = std::max(leak_db, r.diag.leakage_db);
        lines.push_back(std::to_string(trial) + "," + fmt_double(sc.target_delay) + "," +
                        fmt_double(sc.target_doppler) + "," + fmt_double(r.estimate.delay_s) +
                        "," + fmt_double(r.estimate.doppler_hz) + "," + fmt_double(derr) +
                        "," + fmt_double(verr));
    }
    write_lines(out + "/dechirp_trials.csv", lines);
    std::vector<std::string> summary;
    summary.push_back("metric,value");
    summary.push_back("fraction_within_half_bin," +
                      fmt_double(static_cast<double>(within) / trials));
    summary.push_back("worst_si_residual_db," + fmt_double(si_db));
    summary.push_back("worst_leakage_db," + fmt_double(leak_db));
    write_lines(out + "/dechirp_summary.csv", summary);
    write_config_echo(out + "/dechirp.echo.cfg", cfg.effective());
    log << "dechirp: " << within << "/" << trials << " trials within half a bin\n";
    return 0;
}

int run_fullduplex_experiment(KeyValueConfig& cfg, const std::string& out,
                              std::ostream& log) {
    FdScenario sc;
    const int n = cfg.get_int("n", 64);
    const long k = cfg.get_llong("k", 3);
    const int cpp_len = cfg.get_int("cpp_len", 4);
    sc.cfg = ChirpConfig::from_ratio(n, k, 0.0, 1.0, cpp_len);
    sc.pilot_a = cfg.get_int("pilot_a", 10);
    sc.pilot_b = cfg.get_int("pilot_b", 42);
    sc.guard_each_side = cfg.get_int("guard_each_side", 8);
    sc.guard_band_half = cfg.get_int("guard_band_half", 8);
    sc.pilot_amplitude = cfg.get_double("pilot_amplitude", 2.0);
    sc.constellation = cfg.get_string("constellation", "qpsk");
    sc.aa_paths = cfg.get_int("aa_paths", 1);
    sc.ba_paths = cfg.get_int("ba_paths", 2);
    sc.max_delay = cfg.get_int("max_delay", 1);
    sc.max_alpha = cfg.get_int("max_alpha", 1);
    sc.aa_gain = cfg.get_double("aa_gain", 1.0);
    sc.ba_gain = cfg.get_double("ba_gain", 1.0);
    sc.snr_db = cfg.get_double("snr_db", 15.0);
    sc.m_symbols = cfg.get_int("m_symbols", 2);
    sc.trials = cfg.get_int("trials", 500);
    sc.seed = cfg.get_u64("seed", 1);
    sc.threads = cfg.get_int("threads", 1);
    sc.genie_aa = cfg.get_bool("genie_aa", false);
    cfg.finish();

    const FdReport report = simulate_fullduplex(sc);
    std::vector<std::string> lines;
    lines.push_back("trial,errors_fd,errors_hd,bits,residual_db,delay_err,doppler_err");
    for (std::size_t t = 0; t < report.trial_rows.size(); ++t) {
        const auto& row = report.trial_rows[t];
        lines.push_back(std::to_string(t) + "," + std::to_string(row.errors_fd) + "," +
                        std::to_string(row.errors_hd) + "," + std::to_string(row.bits) +
                        "," + fmt_double(row.residual_db) + "," +
                        fmt_double(row.delay_err_cells) + "," +
                        fmt_double(row.doppler_err_cells));
    }
    write_lines(out + "/fd_trials.csv", lines);
    std::vector<std::string> summary;
    summary.push_back("metric,value");
    summary.push_back(std::string("ber_remote,") +
                      (report.ber_defined ? fmt_double(report.ber_remote) : "undefined"));
    summary.push_back("ber_halfduplex," + fmt_double(report.ber_halfduplex));
    summary.push_back("mean_residual_db," + fmt_double(report.mean_residual_db));
    summary.push_back("sensing_delay_mse," + fmt_double(report.sensing_delay_mse));
    summary.push_back("sensing_doppler_mse," + fmt_double(report.sensing_doppler_mse));
    write_lines(out + "/fd_summary.csv", summary);
    write_config_echo(out + "/fullduplex.echo.cfg", cfg.effective());
    log << "fullduplex: ber " << report.ber_remote << " vs baseline "
        << report.ber_halfduplex << ", residual " << report.mean_residual_db << " dB\n";
    return 0;
}

}  // namespace

int run_selftest(std::ostream& log, int threads) {
    struct Check {
        std::string name;
        bool ok = false;
        std::string detail;
    };
    std::vector<Check> checks;
    auto run = [&](const std::string& name, auto&& fn) {
        Check c;
        c.name = name;
        try {
            c.detail = fn();
            c.ok = true;
        } catch (const std::exception& e) {
            c.detail = e.what();
            c.ok = false;
        }
        checks.push_back(c);
    };

    run("transform round-trip", []() {
        Rng rng(1);
        const auto cfg = ChirpConfig::from_real(64, 0.137, 0.71);
        CVec x(64);
        for (auto& v : x) v = rng.cgauss();
        const double err = rel_error(daft(idaft(x, cfg), cfg), x);
        if (err > 1e-10) throw std::runtime_error("round-trip error " + fmt_double(err));
        return "error " + fmt_double(err);
    });
    run("dense-matrix oracle", []() {
        Rng rng(2);
        const auto cfg = ChirpConfig::from_ratio(64, 5, 1.3);
        CVec x(64);
        for (auto& v : x) v = rng.cgauss();
        Eigen::Map<const Eigen::VectorXcd> xv(x.data(), 64);
        const Eigen::VectorXcd dense = daft_matrix(cfg) * xv;
        const CVec fast = daft(x, cfg);
        double err = 0.0;
        for (int i = 0; i < 64; ++i) err += std::norm(fast[static_cast<std::size_t>(i)] - dense(i));
        err = std::sqrt(err);
        if (err > 1e-10) throw std::runtime_error("oracle mismatch " + fmt_double(err));
        return "error " + fmt_double(err);
    });
    run("OFDM degeneracy", []() {
        Rng rng(3);
        const auto cfg = ChirpConfig::ofdm(128);
        CVec x(128);
        for (auto& v : x) v = rng.cgauss();
        const double err = rel_error(idaft(x, cfg), fft::ifft_unitary(x));
        if (err > 1e-12) throw std::runtime_error("IDFT mismatch " + fmt_double(err));
        return "error " + fmt_double(err);
    });
    run("chirp-periodic prefix equals CP", []() {
        Rng rng(4);
        const auto cfg = ChirpConfig::from_ratio(32, 7, 0.0, 1.0, 6);
        CVec x(32);
        for (auto& v : x) v = rng.cgauss();
        const CVec framed = add_cpp(x, cfg);
        for (int i = 0; i < 6; ++i)
            if (framed[static_cast<std::size_t>(i)] != x[static_cast<std::size_t>(26 + i)])
                throw std::runtime_error("prefix differs from cyclic copy");
        return std::string("exact");
    });
    run("ambiguity energy identity", []() {
        const auto cfg = ChirpConfig::from_ratio(32, 3, 0.2, 1.0, 4);
        Rng rng(5);
        const auto c = Constellation::make(ConstellationKind::qpsk);
        std::vector<std::uint8_t> bits(64);
        for (auto& b : bits) b = rng.bit() ? 1 : 0;
        const TimeFrame frame = modulate(c.map_bits(bits), cfg);
        const AmbiguitySurface s = ambiguity_function(frame, {0.0}, {0.0});
        const double err = std::abs(s.values(0, 0).real() - s.frame_energy) / s.frame_energy;
        if (err > 1e-9) throw std::runtime_error("A(0,0) != energy");
        return "error " + fmt_double(err);
    });
    run("unambiguity parallelogram area", []() {
        const auto region = unambiguity_parallelogram(ChirpConfig::from_ratio(128, 9, 0.0));
        if (region.area.num != 1 || region.area.den != 1)
            throw std::runtime_error("area not exactly one");
        return std::string("area 1/1");
    });
    run("matched-filter domain equivalence", []() {
        const auto cfg = ChirpConfig::from_ratio(32, 2, 0.3, 1.0, 6);
        Rng rng(6);
        const auto c = Constellation::make(ConstellationKind::qpsk);
        std::vector<std::uint8_t> bits(64);
        for (auto& b : bits) b = rng.bit() ? 1 : 0;
        const TimeFrame tx = modulate(c.map_bits(bits), cfg);
        LtvChannel ch;
        ch.paths.push_back({cplx{0.7, -0.3}, 2.0, 1.0 / 32.0});
        TimeFrame rx = apply_channel(tx, ch);
        rx = add_awgn(rx, 15.0, rng);
        std::vector<double> delays{0, 1, 2, 3, 4};
        std::vector<double> dopplers{-2.0 / 32, -1.0 / 32, 0, 1.0 / 32, 2.0 / 32};
        const auto t = matched_filter(rx, tx, cfg, MfDomain::time, delays, dopplers);
        const auto d = matched_filter(rx, tx, cfg, MfDomain::daft, delays, dopplers);
        const double scale = t.surface.values.cwiseAbs().maxCoeff();
        const double diff =
            (t.surface.values - d.surface.values).cwiseAbs().maxCoeff() / scale;
        if (diff > 1e-8) throw std::runtime_error("domains differ " + fmt_double(diff));
        return "max rel diff " + fmt_double(diff);
    });
    run("FIM positive semidefinite and SNR scaling", []() {
        CrbConfig cfg;
        cfg.cfg = ChirpConfig::from_ratio(32, 3, 0.1, 0.78e-6, 4);
        cfg.layout = GridLayout::all_data(32);
        cfg.rrc = RrcConfig{0.25, 12, 8};
        cfg.target.delay_s = 2.5e-6;
        cfg.target.doppler_hz = 20000.0;
        Rng rng(7);
        const auto c = Constellation::make(ConstellationKind::qpsk);
        std::vector<std::uint8_t> bits(64);
        for (auto& b : bits) b = rng.bit() ? 1 : 0;
        const CVec grid = c.map_bits(bits);
        cfg.snr_db = 10.0;
        const CrbSample lo = fim_crb_for_grid(cfg, grid);
        cfg.snr_db = 10.0 + 10.0 * std::log10(2.0);
        const CrbSample hi = fim_crb_for_grid(cfg, grid);
        const Eigen::Vector4d eig = lo.fim.selfadjointView<Eigen::Lower>().eigenvalues();
        if (eig.minCoeff() < -1e-9 * lo.fim.norm())
            throw std::runtime_error("FIM not PSD");
        if (std::abs(hi.crb_delay_s2 - 0.5 * lo.crb_delay_s2) > 1e-9 * lo.crb_delay_s2)
            throw std::runtime_error("CRB does not halve with doubled SNR");
        return std::string("ok");
    });
    run("dechirp self-interference suppression", []() {
        const auto cfg = ChirpConfig::from_ratio(128, 2, 0.0, 1.0, 16);
        const auto layout = GridLayout::embedded_pilot(128, 64, 26);
        DechirpDsp dsp;
        dsp.decimation = 4;
        const DechirpPipeline pipe(cfg, layout, dsp, 4.0, 0.25 / 144.0);
        Rng rng(8);
        DechirpScenario sc;
        sc.m_symbols = 2;
        sc.si_amplitude = 100.0;
        sc.echo_gain = cplx{0.05, 0.0};
        sc.target_delay = 2.0;
        sc.snr_db = std::numeric_limits<double>::infinity();
        const DechirpResult r = pipe.run_scenario(sc, rng);
        if (r.diag.si_residual_db > -60.0)
            throw std::runtime_error("SI residual " + fmt_double(r.diag.si_residual_db));
        return "SI residual " + fmt_double(r.diag.si_residual_db) + " dB";
    });
    run("full-duplex genie equals half-duplex", [&]() {
        FdScenario sc;
        sc.cfg = ChirpConfig::from_ratio(64, 3, 0.0, 1.0, 4);
        sc.trials = 10;
        sc.seed = 9;
        sc.threads = threads;
        sc.genie_aa = true;
        const FdReport r = simulate_fullduplex(sc);
        if (r.errors_remote != r.errors_halfduplex)
            throw std::runtime_error("paired error counts differ");
        return std::string("exact");
    });
    run("deterministic outputs", [&]() {
        BerConfig cfg;
        cfg.n = 12;
        cfg.cpp_len = 2;
        cfg.waveform = WaveformKind::afdm;
        cfg.snr_db = {4.0};
        cfg.target_errors = 50;
        cfg.max_trials = 4096;
        cfg.seed = 17;
        cfg.threads = 1;
        const BerCurve a = run_ber(cfg);
        cfg.threads = threads;
        const BerCurve b = run_ber(cfg);
        if (a.points[0].bit_errors != b.points[0].bit_errors ||
            a.points[0].bits != b.points[0].bits)
            throw std::runtime_error("thread count changed the outcome");
        return std::string("identical across thread counts");
    });

    bool all_ok = true;
    for (const auto& c : checks) {
        log << (c.ok ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
        if (!c.ok) all_ok = false;
    }
    log << (all_ok ? "selftest: all checks passed\n" : "selftest: FAILURES present\n");
    return all_ok ? 0 : 1;
}

int run_experiment(const std::string& kind, KeyValueConfig& cfg, const std::string& out_dir,
                   std::ostream& log) {
    // Consume the shared keys so every echo records the seed; the thread
    // count is an execution knob and stays out of the echo.
    cfg.get_u64("seed", 1);
    cfg.get_int("threads", 1);
    cfg.drop_from_echo("threads");
    if (kind == "ber") return run_ber_experiment(cfg, out_dir, log);
    if (kind == "af") return run_af_experiment(cfg, out_dir, log);
    if (kind == "af-expected") return run_af_expected_experiment(cfg, out_dir, log);
    if (kind == "crb") return run_crb_experiment(cfg, out_dir, log);
    if (kind == "mf") return run_mf_experiment(cfg, out_dir, log);
    if (kind == "dechirp") return run_dechirp_experiment(cfg, out_dir, log);
    if (kind == "fullduplex") return run_fullduplex_experiment(cfg, out_dir, log);
    throw ConfigError("unknown experiment kind: " + kind);
}

}  // namespace afdm
