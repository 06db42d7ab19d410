#pragma once

#include "ksphere/geometry.hpp"

#include <cstdint>
#include <random>

namespace ksphere {

using Rng = std::mt19937_64;

// Independent stream keyed by (seed, stream id), so results never depend on
// the order in which streams are consumed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

// Columns are i.i.d. uniform on S^{d-1} (normalized Gaussian vectors).
Mat random_sphere_points(Eigen::Index d, Eigen::Index n, Rng& rng);
Vec random_sphere_point(Eigen::Index d, Rng& rng);
// Uniform direction, radius uniform in [0, max_radius).
Vec random_ball_point(Eigen::Index d, double max_radius, Rng& rng);
// Upper-triangle entries i.i.d. N(0, scale^2).
AntisymmetricMatrix random_antisymmetric(Eigen::Index d, double scale, Rng& rng);
Rotation random_rotation(Eigen::Index d, Rng& rng);

}  // namespace ksphere
