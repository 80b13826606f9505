// csv.hpp - deterministic CSV and config-echo output
#pragma once

#include "afdm/ambiguity.hpp"
#include "afdm/ber.hpp"

#include <map>
#include <string>
#include <vector>

namespace afdm {

// Shortest round-trippable decimal representation; output bytes are
// reproducible across runs.
std::string fmt_double(double v);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

// snr_db, ber, errors, bits, ci95
void write_ber_csv(const std::string& path, const BerCurve& curve);

// Long format: delay_s, doppler_hz, value columns.
void write_surface_csv(const std::string& path, const AmbiguitySurface& surface);

// key = value lines, sorted by key; parses back as a config file.
void write_config_echo(const std::string& path,
                       const std::map<std::string, std::string>& values);

}  // namespace afdm
