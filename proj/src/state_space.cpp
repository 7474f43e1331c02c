#include "dfscore/state_space.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dfscore/csv.hpp"

namespace dfscore {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || first == last)
    throw std::invalid_argument("not a number: '" + text + "'");
  return value;
}

ObservationSequence::ObservationSequence(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw std::invalid_argument("observation dimension must be >= 1");
  if (values_.size() % dim_ != 0) throw std::invalid_argument("observation values not a multiple of dim");
}

SimulatedData simulate(const StateSpaceModel& model, const Vector& theta, std::size_t horizon,
                       Rng& rng) {
  if (horizon < 1) throw std::invalid_argument("simulate: T must be >= 1");
  if (static_cast<std::size_t>(theta.size()) != model.param_dim())
    throw std::invalid_argument("simulate: theta dimension mismatch");
  const std::size_t sd = model.state_dim();
  const std::size_t od = model.obs_dim();
  const std::span<const double> th{theta.data(), model.param_dim()};

  SimulatedData out;
  out.state_dim = sd;
  out.states.resize(horizon * sd);
  std::vector<double> ys(horizon * od);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::span<double> x{out.states.data() + t * sd, sd};
    if (t == 0)
      model.sample_initial(th, rng, x);
    else
      model.sample_transition({out.states.data() + (t - 1) * sd, sd}, th, rng, x);
    model.sample_observation(x, th, rng, {ys.data() + t * od, od});
  }
  out.observations = ObservationSequence(od, std::move(ys));
  return out;
}

void write_observations_csv(const ObservationSequence& obs, std::ostream& out) {
  out << "t";
  if (obs.dim() == 1) {
    out << ",y";
  } else {
    for (std::size_t k = 1; k <= obs.dim(); ++k) out << ",y" << k;
  }
  out << '\n';
  for (std::size_t t = 0; t < obs.length(); ++t) {
    out << (t + 1);
    for (double v : obs.at(t)) out << ',' << format_double(v);
    out << '\n';
  }
}

ObservationSequence read_observations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("observation CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t columns = 0;
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) ++columns;
  }
  if (columns < 2 || line.rfind("t,y", 0) != 0)
    throw std::invalid_argument("observation CSV: header must start with 't,y'");
  const std::size_t dim = columns - 1;

  std::vector<double> values;
  std::size_t expected_t = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      const double v = parse_double(cell);
      if (col == 0) {
        if (v != static_cast<double>(expected_t))
          throw std::invalid_argument("observation CSV: expected t = " + std::to_string(expected_t));
      } else {
        values.push_back(v);
      }
      ++col;
    }
    if (col != columns) throw std::invalid_argument("observation CSV: wrong column count at t = " + std::to_string(expected_t));
    ++expected_t;
  }
  if (values.empty()) throw std::invalid_argument("observation CSV: T must be >= 1");
  return ObservationSequence(dim, std::move(values));
}

}  // namespace dfscore
