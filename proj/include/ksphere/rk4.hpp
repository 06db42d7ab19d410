#pragma once

#include "ksphere/errors.hpp"
#include "ksphere/geometry.hpp"

#include <cmath>
#include <concepts>
#include <string>

namespace ksphere {

template <typename F>
concept VectorField = requires(const F& f, const Vec& x) {
    { f(x) } -> std::convertible_to<Vec>;
};

/// One classical fourth-order Runge-Kutta step of the autonomous field f.
/// Negative h integrates backward in time.
template <VectorField F>
Vec rk4_step(const Vec& state, const F& f, double h) {
    if (!std::isfinite(h)) throw InvalidInput("rk4_step: non-finite step size");
    if (h == 0.0) return state;
    auto check = [](const Vec& v, const char* stage) {
        if (!v.allFinite()) throw IntegrationFailure(std::string("rk4_step: non-finite value in stage ") + stage);
    };
    const Vec k1 = f(state);
    check(k1, "k1");
    const Vec k2 = f(state + 0.5 * h * k1);
    check(k2, "k2");
    const Vec k3 = f(state + 0.5 * h * k2);
    check(k3, "k3");
    const Vec k4 = f(state + h * k3);
    check(k4, "k4");
    Vec next = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check(next, "update");
    return next;
}

// Number of fixed steps of size h needed to reach t_end; h and t_end must
// have the same sign unless t_end == 0.
long long step_count(double h, double t_end);

}  // namespace ksphere
