#include "lowsnr/table_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "lowsnr/error.hpp"

namespace lowsnr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw Error(ErrorCode::IoError, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

params::TabulatedDensity read_density_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  params::TabulatedDensity t;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "lambda,value") {
        throw Error(ErrorCode::IoError, path.string() + ": expected header 'lambda,value'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw Error(ErrorCode::IoError, "line " + std::to_string(line_no) + ": expected two columns");
    }
    t.grid.push_back(parse_double(trim(line.substr(0, comma)), line_no));
    t.values.push_back(parse_double(trim(line.substr(comma + 1)), line_no));
  }
  if (!header_seen) throw Error(ErrorCode::IoError, path.string() + ": empty table");
  return t;
}

void write_density_table(const std::filesystem::path& path, const std::vector<double>& grid,
                         const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "lambda,value\n";
  char buf[64];
  for (std::size_t i = 0; i < grid.size() && i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid[i], values[i]);
    out << buf;
  }
}

FadingModel load_density_model(const std::filesystem::path& path, const ModelOptions& opts) {
  auto t = read_density_table(path);
  return FadingModel::tabulated_density(std::move(t.grid), std::move(t.values), opts);
}

}  // namespace lowsnr
