#pragma once

#include <stdexcept>
#include <string>

namespace incdist {

inline constexpr const char* library_version = "0.1.0";

// Invalid distribution or estimation parameters (wrong sign, shift beyond the
// data minimum, and the like).
class parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative routine ran out of iterations or could not bracket a root.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: unreadable files, bad CSV cells, empty samples.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimation failed in a way that is not a plain non-convergence (degenerate
// split around a threshold, infeasible inner problem, ...).
class fit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace incdist
