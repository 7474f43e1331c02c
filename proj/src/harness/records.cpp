#include "dfscore/harness/records.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dfscore/csv.hpp"

namespace dfscore::harness {
namespace {

template <class T>
std::string cell(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>)
    return format_double(*v);
  else
    return std::to_string(*v);
}

std::optional<double> opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

std::optional<std::size_t> opt_size(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return static_cast<std::size_t>(std::stoull(s));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string error_status(const std::string& message) {
  std::string s = "error:" + message;
  for (char& c : s)
    if (c == ',' || c == '"') c = ';';
    else if (c == '\n' || c == '\r') c = ' ';
  return s;
}

void write_records_csv(const std::vector<RunRecord>& records, std::ostream& out) {
  out << kRunsVersionLine << '\n' << kRunsHeader << '\n';
  for (const auto& r : records) {
    out << r.run_id << ',' << r.seed << ',' << r.method << ',' << cell(r.tau) << ',' << cell(r.h) << ','
        << cell(r.delta) << ',' << cell(r.n_particles) << ',' << cell(r.horizon) << ',' << r.i << ','
        << cell(r.j) << ',' << cell(r.estimate) << ',' << cell(r.oracle) << ',' << cell(r.abs_error) << ','
        << cell(r.wall_time_ms) << ',' << r.status << '\n';
  }
}

std::vector<RunRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunsVersionLine)
    throw std::invalid_argument("runs csv: missing version line");
  if (!std::getline(in, line) || line != kRunsHeader) throw std::invalid_argument("runs csv: unexpected header");
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_row(line);
    if (f.size() != 15) throw std::invalid_argument("runs csv: expected 15 fields, got " + std::to_string(f.size()));
    RunRecord r;
    r.run_id = std::stoull(f[0]);
    r.seed = std::stoull(f[1]);
    r.method = f[2];
    r.tau = opt_double(f[3]);
    r.h = opt_double(f[4]);
    r.delta = opt_size(f[5]);
    r.n_particles = opt_size(f[6]);
    r.horizon = opt_size(f[7]);
    r.i = std::stoull(f[8]);
    r.j = opt_size(f[9]);
    r.estimate = opt_double(f[10]);
    r.oracle = opt_double(f[11]);
    r.abs_error = opt_double(f[12]);
    r.wall_time_ms = opt_double(f[13]);
    r.status = f[14];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dfscore::harness
