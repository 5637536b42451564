#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfgevo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Distributions are stored densely per class, row = state, column = policy
// (or action), row-major.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One dense block per class.
using Field = std::vector<RowMat>;

inline constexpr std::size_t kDefaultPolicyCap = 4096;
inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kIntegratedMassTolerance = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files or configuration.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Operation attempted on a spec that did not validate.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A model assumption (unique recurrent class, revision-rate bound) fails.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

class PolicyCapError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// ---------------------------------------------------------------------------
// Field arithmetic helpers.

Field zeros_like(const Field& f);
double max_abs(const Field& f);
double max_abs_diff(const Field& a, const Field& b);
// a += s * b
void axpy(Field& a, double s, const Field& b);
double min_entry(const Field& f);

// ---------------------------------------------------------------------------
// Random streams. Each (master seed, stream id) pair maps to an independent
// generator; streams never share state.

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  Rng(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();
  // Exponential with the given rate.
  double exponential(double rate);
  double normal();
  // Dirichlet(1,...,1) draw of the given size scaled to `total`.
  Vec simplex(std::size_t n, double total = 1.0);

 private:
  std::uint64_t s_[4];
};

// ---------------------------------------------------------------------------
// Parallel helpers. Worker count honours MFG_EVO_THREADS.

std::size_t worker_threads();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mfgevo
