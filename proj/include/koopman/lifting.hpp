#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "koopman/errors.hpp"

namespace koopman {

/// How the random centers of a dictionary were generated. Stored so a
/// serialized dictionary can be reproduced from its metadata alone.
struct CenterRngMetadata {
  std::string algorithm;
  std::uint64_t seed = 0;
  double box_lo = 0.0;
  double box_hi = 1.0;
};

/// Thin plate spline radial basis function ||x-r||^2 ln||x-r||, with the
/// removable singularity at x = r filled by its limit value 0.
double eval_tps(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& r);

/// A lifting map psi: R^n -> R^N given by the state itself (optional)
/// followed by one thin-plate-spline feature per stored center.
///
/// Immutable after construction; lift() is pure and thread-safe. Center
/// order is fixed at construction and defines the coordinate order of
/// psi everywhere downstream.
class LiftingDictionary {
 public:
  LiftingDictionary(int state_dim, bool include_state, std::vector<Eigen::VectorXd> centers);

  /// psi(x) = x; no radial features.
  static LiftingDictionary identity(int state_dim);

  int state_dim() const { return state_dim_; }
  bool include_state() const { return include_state_; }
  int num_centers() const { return static_cast<int>(centers_.size()); }
  int lifted_dim() const;
  const std::vector<Eigen::VectorXd>& centers() const { return centers_; }

  Eigen::VectorXd lift(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Present when the centers were drawn by sample_dictionary().
  std::optional<CenterRngMetadata> rng_metadata;

 private:
  int state_dim_;
  bool include_state_;
  std::vector<Eigen::VectorXd> centers_;
};

/// Draws `num_centers` centers i.i.d. uniform on [box_lo, box_hi]^n from a
/// deterministic generator; include_state is always true. Identical seeds
/// give identical dictionaries.
LiftingDictionary sample_dictionary(int state_dim, int num_centers, std::uint64_t seed,
                                    double box_lo = 0.0, double box_hi = 1.0);

}  // namespace koopman
