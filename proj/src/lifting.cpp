#include "koopman/lifting.hpp"

#include <cmath>
#include <utility>

#include "koopman/rng.hpp"

namespace koopman {

double eval_tps(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& r) {
  if (x.size() != r.size()) {
    throw DimensionError("eval_tps: x has length " + std::to_string(x.size()) +
                         ", center has length " + std::to_string(r.size()));
  }
  const double d2 = (x - r).squaredNorm();
  if (d2 == 0.0) return 0.0;  // limit of t^2 ln t as t -> 0
  return 0.5 * d2 * std::log(d2);
}

LiftingDictionary::LiftingDictionary(int state_dim, bool include_state,
                                     std::vector<Eigen::VectorXd> centers)
    : state_dim_(state_dim), include_state_(include_state), centers_(std::move(centers)) {
  if (state_dim_ < 1) throw DimensionError("LiftingDictionary: state_dim must be >= 1");
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if (centers_[i].size() != state_dim_) {
      throw DimensionError("LiftingDictionary: center " + std::to_string(i) + " has length " +
                           std::to_string(centers_[i].size()) + ", expected " +
                           std::to_string(state_dim_));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (centers_[i] == centers_[j]) {
        throw Error("LiftingDictionary: centers " + std::to_string(j) + " and " +
                    std::to_string(i) + " coincide; duplicate centers make the lift rank deficient");
      }
    }
  }
}

LiftingDictionary LiftingDictionary::identity(int state_dim) {
  return LiftingDictionary(state_dim, true, {});
}

int LiftingDictionary::lifted_dim() const {
  return (include_state_ ? state_dim_ : 0) + num_centers();
}

Eigen::VectorXd LiftingDictionary::lift(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != state_dim_) {
    throw DimensionError("lift: state has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(state_dim_));
  }
  Eigen::VectorXd psi(lifted_dim());
  int k = 0;
  if (include_state_) {
    psi.head(state_dim_) = x;
    k = state_dim_;
  }
  for (const auto& r : centers_) psi[k++] = eval_tps(x, r);
  return psi;
}

LiftingDictionary sample_dictionary(int state_dim, int num_centers, std::uint64_t seed,
                                    double box_lo, double box_hi) {
  if (num_centers < 0) throw Error("sample_dictionary: num_centers must be >= 0");
  if (!(box_hi > box_lo) && num_centers > 0) {
    throw Error("sample_dictionary: box_hi must exceed box_lo");
  }
  Rng rng(seed);
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(num_centers);
  for (int i = 0; i < num_centers; ++i) {
    Eigen::VectorXd r(state_dim);
    for (int j = 0; j < state_dim; ++j) r[j] = rng.uniform(box_lo, box_hi);
    centers.push_back(std::move(r));
  }
  LiftingDictionary dict(state_dim, true, std::move(centers));
  dict.rng_metadata = CenterRngMetadata{Rng::kAlgorithm, seed, box_lo, box_hi};
  return dict;
}

}  // namespace koopman
