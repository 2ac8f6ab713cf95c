#include "rrgp/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

namespace rrgp {

namespace {

enum class Role { Time, Input, Observation, State };

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  for (auto& s : cells) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return cells;
}

[[noreturn]] void fail(const std::string& source, long line, const std::string& msg) {
  throw InputError(source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

Dataset parse_csv(std::istream& is, const std::string& source) {
  std::string line;
  long line_no = 0;
  if (!std::getline(is, line)) fail(source, 1, "missing header row");
  ++line_no;
  const std::vector<std::string> header = split(line);

  Dataset data;
  std::vector<Role> roles;
  bool has_time = false;
  for (const auto& name : header) {
    if (name == "t") {
      if (has_time) fail(source, line_no, "duplicate column 't'");
      has_time = true;
      roles.push_back(Role::Time);
    } else if (!name.empty() && name[0] == 'u') {
      roles.push_back(Role::Input);
      data.input_names.push_back(name);
    } else if (!name.empty() && name[0] == 'y') {
      roles.push_back(Role::Observation);
      data.observation_names.push_back(name);
    } else if (!name.empty() && name[0] == 'x') {
      roles.push_back(Role::State);
      data.state_names.push_back(name);
    } else {
      fail(source, line_no, "unknown column '" + name + "' (expected t, u*, y* or x*)");
    }
  }
  if (data.observation_names.empty()) fail(source, line_no, "no observation (y*) columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size())
      fail(source, line_no, "expected " + std::to_string(header.size()) + " cells, found " +
                                std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& s = cells[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        fail(source, line_no, "column '" + header[c] + "': '" + s + "' is not a number");
      if (!std::isfinite(v))
        fail(source, line_no, "column '" + header[c] + "': non-finite value");
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }

  const auto T = static_cast<Eigen::Index>(rows.size());
  data.inputs.resize(T, static_cast<Eigen::Index>(data.input_names.size()));
  data.observations.resize(T, static_cast<Eigen::Index>(data.observation_names.size()));
  data.states.resize(T, static_cast<Eigen::Index>(data.state_names.size()));
  if (has_time) data.timestamps = Vector(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::Index iu = 0, iy = 0, ix = 0;
    for (std::size_t c = 0; c < roles.size(); ++c) {
      const double v = rows[static_cast<std::size_t>(t)][c];
      switch (roles[c]) {
        case Role::Time: (*data.timestamps)[t] = v; break;
        case Role::Input: data.inputs(t, iu++) = v; break;
        case Role::Observation: data.observations(t, iy++) = v; break;
        case Role::State: data.states(t, ix++) = v; break;
      }
    }
  }
  return data;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  return parse_csv(in, path);
}

void write_csv(std::ostream& os, const Dataset& data) {
  std::vector<std::string> names;
  if (data.timestamps) names.push_back("t");
  names.insert(names.end(), data.input_names.begin(), data.input_names.end());
  names.insert(names.end(), data.observation_names.begin(), data.observation_names.end());
  names.insert(names.end(), data.state_names.begin(), data.state_names.end());
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
  os << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index t = 0; t < data.length(); ++t) {
    bool first = true;
    const auto put = [&](double v) {
      os << (first ? "" : ",") << v;
      first = false;
    };
    if (data.timestamps) put((*data.timestamps)[t]);
    for (Eigen::Index j = 0; j < data.inputs.cols(); ++j) put(data.inputs(t, j));
    for (Eigen::Index j = 0; j < data.observations.cols(); ++j) put(data.observations(t, j));
    for (Eigen::Index j = 0; j < data.states.cols(); ++j) put(data.states(t, j));
    os << '\n';
  }
}

}  // namespace rrgp
