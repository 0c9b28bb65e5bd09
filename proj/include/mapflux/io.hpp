#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mapflux/core.hpp"

namespace mapflux::io {

/// Header `t,xi,theta_0,...`; one row per alive instant, 17 significant digits.
void write_map_csv(const std::filesystem::path& file, const MapPath& path);
MapPath read_map_csv(const std::filesystem::path& file);

/// Header `t,x_0,...`; one row per alive instant.
void write_ssmp_csv(const std::filesystem::path& file, const SsmpPath& path);
SsmpPath read_ssmp_csv(const std::filesystem::path& file);

struct Sidecar {
  std::string model;
  double alpha = 2.0;
  double dt = 0.0;
  double t_max = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> kill_index;
};

void write_sidecar(const std::filesystem::path& file, const Sidecar& meta);
Sidecar read_sidecar(const std::filesystem::path& file);

/// "<file>.json" next to a CSV.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// printf("%.17g"), with a plain "0" for zero.
std::string format_double(double v);

}  // namespace mapflux::io
