#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "playtime/distributions.hpp"
#include "playtime/error.hpp"

namespace playtime {

/// Log base and the additive smoothing applied to reference distributions in
/// cross-entropy. Individual distributions are never smoothed.
struct EntropyConfig {
  double log_base = 2.0;
  double smoothing_epsilon = 1e-6;

  /// Throws InvalidConfig unless log_base > 1 and 0 <= epsilon < 1/max_period_length.
  void validate(int max_period_length) const;
};

/// Shannon entropy sum p(x) log(1/p(x)) of a probability vector, with
/// 0 log(1/0) = 0.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& p,
                                 typename Derived::Scalar log_base = 2) {
  using Scalar = typename Derived::Scalar;
  using std::log;
  Scalar sum(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Scalar pi = p(i);
    if (pi > Scalar(0)) sum -= pi * log(pi);
  }
  return sum / log(log_base);
}

/// Cross-entropy sum p(x) log(1/q~(x)) where q~ = (q + eps) / (1 + eps |q|).
/// With eps = 0 a zero in q under positive p throws UnsmoothedZeroReference.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar cross_entropy(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q,
                                        typename DerivedP::Scalar log_base = 2,
                                        typename DerivedP::Scalar epsilon = 0) {
  using Scalar = typename DerivedP::Scalar;
  using std::log;
  if (p.size() != q.size()) {
    throw Error(ErrorCode::SupportMismatch, "support sizes " + std::to_string(p.size()) + " and " +
                                                std::to_string(q.size()) + " differ");
  }
  const Scalar norm = Scalar(1) + epsilon * static_cast<Scalar>(q.size());
  Scalar sum(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Scalar pi = p(i);
    if (!(pi > Scalar(0))) continue;
    const Scalar qi = (static_cast<Scalar>(q(i)) + epsilon) / norm;
    if (!(qi > Scalar(0))) {
      throw Error(ErrorCode::UnsmoothedZeroReference,
                  "reference has zero probability where p is positive (index " + std::to_string(i) +
                      ")");
    }
    sum -= pi * log(qi);
  }
  return sum / log(log_base);
}

/// Entropy of a non-EMPTY distribution. Throws EmptyDistribution.
double entropy(const Distribution& p, const EntropyConfig& cfg);

/// Cross-entropy of an individual distribution against a reference on the
/// same period. Throws EmptyDistribution, SupportMismatch or
/// UnsmoothedZeroReference.
double cross_entropy(const Distribution& p, const Distribution& q, const EntropyConfig& cfg);

}  // namespace playtime
