#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "fracmg/errors.hpp"

namespace fracmg {

/// Finite list of (angle, weight) atoms representing M = sum p_k delta(theta - theta_k).
struct DirectionalMeasure {
    struct Atom {
        double theta;  // in [0, 2*pi)
        double weight; // >= 0
    };
    std::vector<Atom> atoms;

    double total_weight() const {
        double s = 0;
        for (const auto& a : atoms) s += a.weight;
        return s;
    }

    /// M(theta) = M(theta + pi): every atom must have a matching atom at
    /// theta + pi (mod 2*pi) with the same weight.
    bool is_pi_symmetric(double tol = 1e-12) const {
        const double two_pi = 2 * std::numbers::pi;
        for (const auto& a : atoms) {
            double want = std::fmod(a.theta + std::numbers::pi, two_pi);
            bool found = false;
            for (const auto& b : atoms) {
                double dth = std::fmod(std::abs(b.theta - want), two_pi);
                dth = std::min(dth, two_pi - dth);
                if (dth < tol && std::abs(b.weight - a.weight) <= tol * (1.0 + a.weight)) {
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        return true;
    }
};

/// Compound-trapezoid discretization of a continuous directional density.
/// Atoms are theta_i = 2*pi*i/N at weight dtheta*density(theta_i); for a
/// periodic density the trapezoid rule collapses to this uniform sum.
inline DirectionalMeasure discretize_measure(const std::function<double(double)>& density,
                                             int n_theta) {
    if (n_theta <= 0 || n_theta % 4 != 0)
        throw config_error("discretize_measure: N_theta must be a positive multiple of 4");
    const double two_pi = 2 * std::numbers::pi;
    const double dtheta = two_pi / n_theta;
    DirectionalMeasure m;
    m.atoms.reserve(std::size_t(n_theta));
    for (int i = 0; i < n_theta; ++i) {
        double th = dtheta * i;
        double w = dtheta * density(th);
        if (w < 0) throw config_error("discretize_measure: density must be nonnegative");
        m.atoms.push_back({th, w});
    }
    if (!m.is_pi_symmetric(1e-10))
        throw config_error("discretize_measure: density is not pi-symmetric");
    return m;
}

/// Quarter weights on the four axis directions (the discrete measure of the
/// symmetric axis-aligned problem).
inline DirectionalMeasure axis_quarter_measure() {
    const double pi = std::numbers::pi;
    return DirectionalMeasure{{{0.0, 0.25}, {pi / 2, 0.25}, {pi, 0.25}, {3 * pi / 2, 0.25}}};
}

} // namespace fracmg
