#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "reachkit/geometry/box.hpp"
#include "reachkit/geometry/ellipsoid.hpp"

namespace reachkit::randup {

using SetVariant = std::variant<geometry::AxisAlignedBox, geometry::Ellipsoid>;

/// The compact parameter set Z = X0 x U^N x Theta x W^N. Zero-width control
/// boxes encode fixed open-loop control sequences; theta and disturbance
/// blocks may be empty (dimension 0 in the model).
struct UncertaintySpec {
  SetVariant x0_set;
  std::vector<geometry::AxisAlignedBox> control_sets;  // one per timestep
  std::optional<geometry::AxisAlignedBox> theta_set;
  std::optional<geometry::AxisAlignedBox> disturbance_set;  // reused every step
  int horizon = 0;

  int x0_dim() const;
  int control_dim() const;
  int theta_dim() const { return theta_set ? theta_set->dim() : 0; }
  int disturbance_dim() const { return disturbance_set ? disturbance_set->dim() : 0; }

  /// Replicates one control box across the horizon.
  static std::vector<geometry::AxisAlignedBox> replicate_controls(
      const geometry::AxisAlignedBox& box, int horizon);
  /// Zero-width boxes pinning an explicit control sequence.
  static std::vector<geometry::AxisAlignedBox> singleton_controls(
      const std::vector<Eigen::VectorXd>& controls);
};

struct BlockDistribution {
  enum class Kind { Uniform, Beta };
  Kind kind = Kind::Uniform;
  double alpha = 1.0;
  double beta = 1.0;

  static BlockDistribution uniform() { return {}; }
  static BlockDistribution beta_shape(double a, double b) {
    return {Kind::Beta, a, b};
  }
};

struct SamplerConfig {
  std::uint64_t seed = 0;
  int particles = 100;  // M
  BlockDistribution x0_dist;
  BlockDistribution control_dist;
  BlockDistribution theta_dist;
  BlockDistribution disturbance_dist;
};

}  // namespace reachkit::randup
