#include "mfgevo/common.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace mfgevo {

Field zeros_like(const Field& f) {
  Field out;
  out.reserve(f.size());
  for (const auto& m : f) out.push_back(RowMat::Zero(m.rows(), m.cols()));
  return out;
}

double max_abs(const Field& f) {
  double r = 0.0;
  for (const auto& m : f)
    if (m.size() > 0) r = std::max(r, m.cwiseAbs().maxCoeff());
  return r;
}

double max_abs_diff(const Field& a, const Field& b) {
  if (a.size() != b.size()) throw DimensionError("field class count mismatch");
  double r = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c].rows() != b[c].rows() || a[c].cols() != b[c].cols())
      throw DimensionError("field block shape mismatch");
    if (a[c].size() > 0) r = std::max(r, (a[c] - b[c]).cwiseAbs().maxCoeff());
  }
  return r;
}

void axpy(Field& a, double s, const Field& b) {
  for (std::size_t c = 0; c < a.size(); ++c) a[c].noalias() += s * b[c];
}

double min_entry(const Field& f) {
  double r = 0.0;
  bool first = true;
  for (const auto& m : f) {
    if (m.size() == 0) continue;
    double v = m.minCoeff();
    r = first ? v : std::min(r, v);
    first = false;
  }
  return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

// xoshiro256** seeded through splitmix64 of (seed, stream).
Rng::Rng(std::uint64_t master_seed, std::uint64_t stream) {
  std::uint64_t x = splitmix64(master_seed) ^ splitmix64(~stream + 0x632BE59BD9B4E019ULL);
  for (auto& s : s_) {
    x = splitmix64(x);
    s = x;
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

double Rng::normal() {
  // Box-Muller; one variate per call keeps the draw count fixed.
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Vec Rng::simplex(std::size_t n, double total) {
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = exponential(1.0);
  return v * (total / v.sum());
}

std::size_t worker_threads() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MFG_EVO_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return std::min<std::size_t>(static_cast<std::size_t>(v), hw);
  }
  return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min(worker_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mfgevo
