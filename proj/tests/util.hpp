#ifndef OAM_TESTS_UTIL_HPP
#define OAM_TESTS_UTIL_HPP

#include <cmath>
#include <numbers>

#include "oam/rng.hpp"
#include "oam/states.hpp"

namespace oam::testutil {

// Uniform complex in the unit square, centered.
inline Complex random_complex(RngStream& rng) {
    return {2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0};
}

inline Matrix random_matrix(int n, RngStream& rng) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = random_complex(rng);
    return m;
}

inline Matrix random_psd(int n, RngStream& rng) {
    const Matrix b = random_matrix(n, rng);
    return b * b.adjoint();
}

inline DensityMatrix random_density(int n, RngStream& rng) {
    Matrix h = random_psd(n, rng);
    h /= h.trace().real();
    return DensityMatrix(0.5 * (h + h.adjoint()));
}

inline Matrix random_unitary(int n, RngStream& rng) {
    const Eigen::HouseholderQR<Matrix> qr(random_matrix(n, rng));
    Matrix q = qr.householderQ();
    // fix the phase convention so Q is unique-ish; not required, but tidy
    return q;
}

// Standard normal via Box-Muller.
inline double random_normal(RngStream& rng) {
    double u1 = rng.next_double();
    while (u1 == 0.0) u1 = rng.next_double();
    const double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace oam::testutil

#endif
