#include "playtime/entropy.hpp"

namespace playtime {
namespace {

void require_non_empty(const Distribution& d, const char* role) {
  if (d.empty()) throw Error(ErrorCode::EmptyDistribution, std::string(role) + " distribution is EMPTY");
}

}  // namespace

void EntropyConfig::validate(int max_period_length) const {
  if (!(log_base > 1.0) || !std::isfinite(log_base)) {
    throw Error(ErrorCode::InvalidConfig, "log base must be finite and > 1");
  }
  if (!(smoothing_epsilon >= 0.0) ||
      !(smoothing_epsilon * static_cast<double>(max_period_length) < 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "smoothing epsilon must lie in [0, 1/" + std::to_string(max_period_length) + ")");
  }
}

double entropy(const Distribution& p, const EntropyConfig& cfg) {
  require_non_empty(p, "input");
  return entropy(p.probs, cfg.log_base);
}

double cross_entropy(const Distribution& p, const Distribution& q, const EntropyConfig& cfg) {
  require_non_empty(p, "individual");
  require_non_empty(q, "reference");
  if (p.period != q.period || p.probs.size() != q.probs.size() ||
      (p.hour_slot && q.hour_slot && *p.hour_slot != *q.hour_slot)) {
    throw Error(ErrorCode::SupportMismatch, "distributions cover different periods or slots");
  }
  return cross_entropy(p.probs, q.probs, cfg.log_base, cfg.smoothing_epsilon);
}

}  // namespace playtime
