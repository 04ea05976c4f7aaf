#pragma once

// Test-side oracles, kept independent of the library's solver paths:
// fixed-point constants refined offline with 40-digit Newton on the system
// equations, a finite-difference Newton for cross-checks, and plain
// power-iteration trajectories for the linear-system oracle.

#include <cmath>
#include <random>

#include "koopman/dynamics.hpp"

namespace oracle {

using koopman::Mat;
using koopman::Vec;

// Toggle-switch equilibria for alpha1=alpha2=1, beta=3.55, gamma=3.53,
// kappa1=kappa2=0.5. The paper rounds these to (2, 0.16) and (0.16, 2);
// the saddle is exactly (1, 1).
inline Vec toggle_fp_right() { return (Vec(2) << 1.9970065261715962, 0.16012147136900209).finished(); }
inline Vec toggle_fp_left() { return (Vec(2) << 0.15808913156858109, 1.9970316912972918).finished(); }

inline Vec second_fp_right() { return (Vec(2) << std::sqrt(2.0), 1.0).finished(); }
inline Vec second_fp_left() { return (Vec(2) << -std::sqrt(2.0), 1.0).finished(); }
inline Vec second_fp_saddle() { return Vec::Zero(2); }

// RK4 polynomial 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1.
constexpr double rk4_decay_step = 0.9048375;

// Damped Newton with forward-difference Jacobian; deliberately different
// step/dampening choices from the library's refiner.
inline Vec newton_fd(const koopman::VectorField& field, Vec x, int iters = 80) {
    const double h = 1e-8;
    for (int it = 0; it < iters; ++it) {
        const Vec f = field(x);
        Mat J(x.size(), x.size());
        for (koopman::Index j = 0; j < x.size(); ++j) {
            Vec xp = x;
            xp[j] += h;
            J.col(j) = (field(xp) - f) / h;
        }
        x += J.colPivHouseholderQr().solve(-f);
    }
    return x;
}

// x_{t+1} = A x_t trajectories; the exact-recovery and prediction oracles
// compare the fitted operator against these directly.
inline std::vector<koopman::Trajectory> linear_trajectories(const Mat& A, int count, long steps,
                                                            unsigned seed = 7) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<koopman::Trajectory> out;
    for (int i = 0; i < count; ++i) {
        koopman::Trajectory t;
        t.id = "lin" + std::to_string(i);
        t.dt = 1.0;
        t.states.resize(A.rows(), steps + 1);
        Vec x(A.rows());
        for (koopman::Index j = 0; j < x.size(); ++j) x[j] = dist(gen);
        t.states.col(0) = x;
        for (long s = 0; s < steps; ++s) {
            x = A * x;
            t.states.col(s + 1) = x;
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline Mat matrix_power(const Mat& A, long n) {
    Mat P = Mat::Identity(A.rows(), A.cols());
    for (long i = 0; i < n; ++i) P = A * P;
    return P;
}

// Greedy nearest matching between two eigenvalue multisets; sorting by
// (re, im) is unstable for conjugate pairs whose real parts differ at the
// last ulp.
inline double multiset_distance(std::vector<std::complex<double>> a,
                                std::vector<std::complex<double>> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const auto& za : a) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double d = std::abs(za - b[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        worst = std::max(worst, best_d);
        b.erase(b.begin() + best);
    }
    return worst;
}

}  // namespace oracle
