#include "afdm/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace afdm {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& line : lines) out << line << '\n';
}

void write_ber_csv(const std::string& path, const BerCurve& curve) {
    std::vector<std::string> lines;
    lines.push_back("snr_db,ber,errors,bits,ci95");
    for (const auto& p : curve.points) {
        lines.push_back(fmt_double(p.snr_db) + "," + fmt_double(p.ber) + "," +
                        std::to_string(p.bit_errors) + "," + std::to_string(p.bits) + "," +
                        fmt_double(p.ci95_half));
    }
    write_lines(path, lines);
}

void write_surface_csv(const std::string& path, const AmbiguitySurface& surface) {
    std::vector<std::string> lines;
    if (surface.magnitude_squared) {
        lines.push_back("delay_s,doppler_hz,mean_abs2");
    } else {
        lines.push_back("delay_s,doppler_hz,re,im");
    }
    for (std::size_t d = 0; d < surface.delay_axis.size(); ++d) {
        for (std::size_t j = 0; j < surface.doppler_axis.size(); ++j) {
            const cplx v = surface.values(static_cast<Eigen::Index>(d),
                                          static_cast<Eigen::Index>(j));
            std::string line = fmt_double(surface.delay_axis[d]) + "," +
                               fmt_double(surface.doppler_axis[j]) + ",";
            if (surface.magnitude_squared) {
                line += fmt_double(v.real());
            } else {
                line += fmt_double(v.real()) + "," + fmt_double(v.imag());
            }
            lines.push_back(std::move(line));
        }
    }
    write_lines(path, lines);
}

void write_config_echo(const std::string& path,
                       const std::map<std::string, std::string>& values) {
    std::vector<std::string> lines;
    for (const auto& [key, value] : values) lines.push_back(key + " = " + value);
    write_lines(path, lines);
}

}  // namespace afdm
