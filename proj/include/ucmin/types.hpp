#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

namespace ucmin {

using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Neumaier-compensated scalar accumulator.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Per-coordinate compensated vector accumulator.
class KahanVec {
 public:
  explicit KahanVec(Index n) : sum_(Vec::Zero(n)), comp_(Vec::Zero(n)) {}

  void add(const Vec& v) {
    for (Index i = 0; i < sum_.size(); ++i) {
      const double s = sum_[i];
      const double t = s + v[i];
      if (std::abs(s) >= std::abs(v[i])) {
        comp_[i] += (s - t) + v[i];
      } else {
        comp_[i] += (v[i] - t) + s;
      }
      sum_[i] = t;
    }
  }
  Vec value() const { return sum_ + comp_; }

 private:
  Vec sum_;
  Vec comp_;
};

}  // namespace ucmin
