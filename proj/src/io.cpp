#include "mapflux/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "mapflux/errors.hpp"

namespace mapflux::io {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + file.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + file.string());
  return in;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::filesystem::path& file) {
  auto in = open_in(file);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(file.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " columns");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') {
        throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": bad number '" +
                              c + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw ValidationError(file.string() + " has no data rows");
  return t;
}

void expect_header(const Table& t, const std::string& second, const std::string& prefix,
                   const std::filesystem::path& file) {
  bool ok = t.header.size() >= 2 && t.header[0] == "t";
  std::size_t first = 1;
  if (!second.empty()) {
    ok = ok && t.header[1] == second;
    first = 2;
  }
  for (std::size_t j = first; ok && j < t.header.size(); ++j) {
    ok = t.header[j] == prefix + std::to_string(j - first);
  }
  if (!ok || t.header.size() <= first) {
    throw ValidationError(file.string() + ": unexpected header");
  }
}

TimeGrid grid_of(const Table& t) {
  std::vector<double> times;
  times.reserve(t.rows.size());
  for (const auto& r : t.rows) times.push_back(r[0]);
  return TimeGrid(std::move(times));
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

void write_map_csv(const std::filesystem::path& file, const MapPath& path) {
  auto out = open_out(file);
  out << "t,xi";
  for (std::size_t j = 0; j < path.dim; ++j) out << ",theta_" << j;
  out << '\n';
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_double(path.grid[i]) << ',' << format_double(path.xi[i]);
    for (double v : path.theta_at(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

MapPath read_map_csv(const std::filesystem::path& file) {
  const Table t = read_table(file);
  expect_header(t, "xi", "theta_", file);
  MapPath p;
  p.grid = grid_of(t);
  p.dim = t.header.size() - 2;
  for (const auto& r : t.rows) {
    p.xi.push_back(r[1]);
    p.theta.insert(p.theta.end(), r.begin() + 2, r.end());
  }
  return p;
}

void write_ssmp_csv(const std::filesystem::path& file, const SsmpPath& path) {
  auto out = open_out(file);
  out << 't';
  for (std::size_t j = 0; j < path.dim; ++j) out << ",x_" << j;
  out << '\n';
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_double(path.grid[i]);
    for (double v : path.x_at(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

SsmpPath read_ssmp_csv(const std::filesystem::path& file) {
  const Table t = read_table(file);
  expect_header(t, "", "x_", file);
  SsmpPath p;
  p.grid = grid_of(t);
  p.dim = t.header.size() - 1;
  for (const auto& r : t.rows) p.x.insert(p.x.end(), r.begin() + 1, r.end());
  return p;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  return csv.string() + ".json";
}

void write_sidecar(const std::filesystem::path& file, const Sidecar& meta) {
  nlohmann::ordered_json j;
  j["model"] = meta.model;
  j["alpha"] = meta.alpha;
  j["dt"] = meta.dt;
  j["t_max"] = meta.t_max;
  j["seed"] = meta.seed;
  j["kill_index"] = meta.kill_index ? nlohmann::ordered_json(*meta.kill_index) : nullptr;
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

Sidecar read_sidecar(const std::filesystem::path& file) {
  auto in = open_in(file);
  nlohmann::json j;
  try {
    in >> j;
    Sidecar s;
    s.model = j.at("model").get<std::string>();
    s.alpha = j.at("alpha").get<double>();
    s.dt = j.at("dt").get<double>();
    s.t_max = j.at("t_max").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("kill_index").is_null()) s.kill_index = j.at("kill_index").get<std::size_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
}

}  // namespace mapflux::io
