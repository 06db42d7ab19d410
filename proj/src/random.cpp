#include "ksphere/random.hpp"

namespace ksphere {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x6b73u};
    return Rng(seq);
}

Vec random_sphere_point(Eigen::Index d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(d);
    do {
        for (Eigen::Index k = 0; k < d; ++k) v(k) = normal(rng);
    } while (v.norm() < 1e-8);
    return v / v.norm();
}

Mat random_sphere_points(Eigen::Index d, Eigen::Index n, Rng& rng) {
    Mat pts(d, n);
    for (Eigen::Index i = 0; i < n; ++i) pts.col(i) = random_sphere_point(d, rng);
    return pts;
}

Vec random_ball_point(Eigen::Index d, double max_radius, Rng& rng) {
    std::uniform_real_distribution<double> uniform(0.0, max_radius);
    const Vec dir = random_sphere_point(d, rng);
    return uniform(rng) * dir;
}

AntisymmetricMatrix random_antisymmetric(Eigen::Index d, double scale, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec upper(d * (d - 1) / 2);
    for (Eigen::Index k = 0; k < upper.size(); ++k) upper(k) = scale * normal(rng);
    return AntisymmetricMatrix(d, std::move(upper));
}

Rotation random_rotation(Eigen::Index d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return Rotation::project(q);
}

}  // namespace ksphere
