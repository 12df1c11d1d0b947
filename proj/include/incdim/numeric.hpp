#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace incdim {

/// Compensated (Neumaier) running sum.
class NeumaierSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Weights below this are treated as exact zeros.
inline constexpr double kNegligibleWeight = 1e-300;

/// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) noexcept {
  return x > kNegligibleWeight ? x * std::log(x) : 0.0;
}

/// Slack used for containment and tie comparisons.
inline constexpr double kContainmentSlack = 1e-12;

/// Shortest round-trippable rendering used for every emitted number.
std::string fmt17(double x);

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 14695981039346656037ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

}  // namespace incdim
