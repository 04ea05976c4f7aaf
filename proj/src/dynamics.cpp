#include "koopman/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace koopman {

namespace {

double param(const std::map<std::string, double>& params, const std::string& key,
             double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace

Vec toggle_switch_field(const Vec& x, const std::map<std::string, double>& params) {
    if (x.size() != 2) throw ValidationError("toggle_switch_field: state must be 2-dimensional");
    const double a1 = param(params, "alpha1", 1.0);
    const double a2 = param(params, "alpha2", 1.0);
    const double beta = param(params, "beta", 3.55);
    const double gamma = param(params, "gamma", 3.53);
    const double k1 = param(params, "kappa1", 0.5);
    const double k2 = param(params, "kappa2", 0.5);
    if (k1 <= 0.0 || k2 <= 0.0) throw ValidationError("toggle_switch_field: decay rates must be positive");

    Vec dx(2);
    dx[0] = a1 / (1.0 + std::pow(x[1], beta)) - k1 * x[0];
    dx[1] = a2 / (1.0 + std::pow(x[0], gamma)) - k2 * x[1];
    if (!all_finite(dx)) {
        std::ostringstream msg;
        msg << "toggle_switch_field: non-finite derivative at (" << x[0] << ", " << x[1] << ")";
        throw IntegrationError(msg.str(), x, -1);
    }
    return dx;
}

Vec second_order_field(const Vec& x) {
    if (x.size() != 2) throw ValidationError("second_order_field: state must be 2-dimensional");
    Vec dx(2);
    dx[0] = x[0] - x[0] * x[1];
    dx[1] = x[0] * x[0] - 2.0 * x[1];
    return dx;
}

VectorField make_field(const SystemSpec& system) {
    if (system.dim < 1) throw ValidationError("make_field: dim must be >= 1");
    if (system.name == "toggle_switch") {
        if (system.dim != 2) throw ValidationError("toggle_switch has dim 2");
        auto params = system.params;
        // validate once up front
        Vec probe = Vec::Zero(2);
        (void)toggle_switch_field(probe, params);
        return [params](const Vec& x) { return toggle_switch_field(x, params); };
    }
    if (system.name == "second_order") {
        if (system.dim != 2) throw ValidationError("second_order has dim 2");
        return [](const Vec& x) { return second_order_field(x); };
    }
    throw ValidationError("make_field: unknown system '" + system.name + "'");
}

Vec rk4_step(const VectorField& field, const Vec& x, double dt) {
    if (dt <= 0.0) throw ValidationError("rk4_step: dt must be positive");
    const Vec k1 = field(x);
    const Vec k2 = field(x + 0.5 * dt * k1);
    const Vec k3 = field(x + 0.5 * dt * k2);
    const Vec k4 = field(x + dt * k3);
    Vec next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
        throw IntegrationError("rk4_step: non-finite update", x, -1);
    }
    return next;
}

Trajectory simulate(const SystemSpec& system, const Vec& x0, double dt, long steps,
                    const std::string& id, const SimulateOptions& opts) {
    if (steps < 1) throw ValidationError("simulate: steps must be >= 1");
    if (static_cast<int>(x0.size()) != system.dim)
        throw ValidationError("simulate: x0 dimension does not match system");
    const VectorField field = make_field(system);

    Trajectory traj;
    traj.id = id;
    traj.system = system.name;
    traj.dt = dt;
    traj.states.resize(x0.size(), steps + 1);
    traj.states.col(0) = x0;

    Vec x = x0;
    for (long t = 0; t < steps; ++t) {
        try {
            x = rk4_step(field, x, dt);
        } catch (const IntegrationError& e) {
            std::ostringstream msg;
            msg << "simulate: trajectory '" << id << "' failed at step " << (t + 1)
                << ": " << e.what();
            throw IntegrationError(msg.str(), e.state, t + 1);
        }
        if (opts.domain_guard) {
            const auto& [lo, hi] = *opts.domain_guard;
            if ((x.array() < lo.array()).any() || (x.array() > hi.array()).any()) {
                std::ostringstream msg;
                msg << "simulate: trajectory '" << id << "' left the domain guard at step "
                    << (t + 1);
                throw IntegrationError(msg.str(), x, t + 1);
            }
        }
        traj.states.col(t + 1) = x;
    }
    return traj;
}

std::vector<Vec> grid_initial_conditions(const InitialConditionGrid& grid) {
    const Index d = grid.lower.size();
    if (grid.upper.size() != d || static_cast<Index>(grid.counts.size()) != d)
        throw ValidationError("grid_initial_conditions: lower/upper/counts sizes disagree");
    long total = 1;
    for (Index i = 0; i < d; ++i) {
        const int c = grid.counts[i];
        if (c < 1) throw ValidationError("grid_initial_conditions: counts must be >= 1");
        if (c > 1 && grid.lower[i] >= grid.upper[i])
            throw ValidationError("grid_initial_conditions: lower must be < upper on multi-point axes");
        if (c == 1 && grid.lower[i] > grid.upper[i])
            throw ValidationError("grid_initial_conditions: lower must be <= upper");
        total *= c;
    }

    std::vector<Vec> points;
    points.reserve(total);
    std::vector<int> idx(d, 0);
    for (long n = 0; n < total; ++n) {
        Vec p(d);
        for (Index i = 0; i < d; ++i) {
            const int c = grid.counts[i];
            p[i] = (c == 1) ? grid.lower[i]
                            : grid.lower[i] + (grid.upper[i] - grid.lower[i]) * idx[i] / (c - 1);
        }
        points.push_back(p);
        // first axis fastest
        for (Index i = 0; i < d; ++i) {
            if (++idx[i] < grid.counts[i]) break;
            idx[i] = 0;
        }
    }
    return points;
}

std::pair<Vec, Vec> guard_box(const InitialConditionGrid& grid, double factor) {
    Vec center = 0.5 * (grid.lower + grid.upper);
    Vec half = 0.5 * (grid.upper - grid.lower);
    for (Index i = 0; i < half.size(); ++i)
        if (half[i] <= 0.0) half[i] = 1.0;  // degenerate axis still gets a finite guard
    return {center - factor * half, center + factor * half};
}

Vec find_fixed_point(const VectorField& field, const Vec& seed, double tol, int max_iter) {
    const Index d = seed.size();
    Vec x = seed;
    const double h = 1e-7;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Vec f = field(x);
        if (f.norm() < tol) return x;
        Mat J(d, d);
        for (Index j = 0; j < d; ++j) {
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            J.col(j) = (field(xp) - field(xm)) / (2.0 * h);
        }
        const Vec delta = J.fullPivLu().solve(-f);
        x += delta;
        if (!x.allFinite()) throw NumericalError("find_fixed_point: diverged");
        if (delta.norm() < tol && field(x).norm() < 1e-10) return x;
    }
    if (field(x).norm() < 1e-8) return x;
    throw NumericalError("find_fixed_point: no convergence from the given seed");
}

std::vector<Vec> find_attractors(const SystemSpec& system) {
    const VectorField field = make_field(system);
    std::vector<Vec> seeds;
    if (system.name == "toggle_switch") {
        seeds = {(Vec(2) << 2.0, 0.16).finished(), (Vec(2) << 0.16, 2.0).finished()};
    } else if (system.name == "second_order") {
        seeds = {(Vec(2) << -std::sqrt(2.0), 1.0).finished(),
                 (Vec(2) << std::sqrt(2.0), 1.0).finished()};
    } else {
        throw ValidationError("find_attractors: unknown system '" + system.name + "'");
    }
    std::vector<Vec> out;
    for (const Vec& s : seeds) out.push_back(find_fixed_point(field, s));
    std::sort(out.begin(), out.end(), [](const Vec& a, const Vec& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    return out;
}

}  // namespace koopman
