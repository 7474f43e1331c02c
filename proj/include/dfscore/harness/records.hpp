#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dfscore::harness {

/// One estimated component. Score rows leave j empty; OIM rows carry both
/// indices (1-based). Optional fields are written as empty cells.
struct RunRecord {
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::optional<double> tau;
  std::optional<double> h;
  std::optional<std::size_t> delta;
  std::optional<std::size_t> n_particles;
  std::optional<std::size_t> horizon;
  std::size_t i = 1;
  std::optional<std::size_t> j;
  std::optional<double> estimate;
  std::optional<double> oracle;
  std::optional<double> abs_error;
  std::optional<double> wall_time_ms;
  std::string status = "ok";  ///< "ok" or "error:<message>"

  bool ok() const { return status == "ok"; }
};

inline constexpr const char* kRunsVersionLine = "# dfscore runs v1";
inline constexpr const char* kRunsHeader =
    "run_id,seed,method,tau,h,delta,n_particles,T,i,j,estimate,oracle,abs_error,wall_time_ms,status";

void write_records_csv(const std::vector<RunRecord>& records, std::ostream& out);
std::vector<RunRecord> read_records_csv(std::istream& in);

/// Error tag for a failed run: commas, quotes and line breaks replaced so
/// the cell stays a single unquoted CSV field.
std::string error_status(const std::string& message);

}  // namespace dfscore::harness
