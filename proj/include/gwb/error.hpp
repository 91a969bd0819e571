#pragma once

#include <stdexcept>
#include <string>

namespace gwb {

/// Category of a failed input check.
enum class errc {
  not_square,
  asymmetric,
  nonzero_diagonal,
  negative_entry,
  non_finite,
  weight_sum,
  triangle_violation,
  feature_rows,
  dimension_mismatch,
  bad_argument,
  infeasible,
};

inline const char* to_string(errc c) {
  switch (c) {
    case errc::not_square: return "not_square";
    case errc::asymmetric: return "asymmetric";
    case errc::nonzero_diagonal: return "nonzero_diagonal";
    case errc::negative_entry: return "negative_entry";
    case errc::non_finite: return "non_finite";
    case errc::weight_sum: return "weight_sum";
    case errc::triangle_violation: return "triangle_violation";
    case errc::feature_rows: return "feature_rows";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::bad_argument: return "bad_argument";
    case errc::infeasible: return "infeasible";
  }
  return "unknown";
}

/// Input data violates a type invariant. Carries the failed check.
class validation_error : public std::runtime_error {
 public:
  validation_error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gwb
