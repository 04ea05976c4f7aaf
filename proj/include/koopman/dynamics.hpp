#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "koopman/types.hpp"

namespace koopman {

/// A named continuous-time system with its parameter set.
struct SystemSpec {
    std::string name;
    int dim = 2;
    std::map<std::string, double> params;
};

/// Sampled states of one initial condition under the discrete map (flow over dt).
/// states is dim x (steps+1); column t is x_t.
struct Trajectory {
    std::string id;
    std::string system;
    double dt = 0.0;
    Mat states;

    Index length() const { return states.cols(); }
    int dim() const { return static_cast<int>(states.rows()); }
};

/// Axis-aligned lattice of initial conditions.
struct InitialConditionGrid {
    Vec lower;
    Vec upper;
    std::vector<int> counts;
};

using VectorField = std::function<Vec(const Vec&)>;

/// Toggle-switch vector field: dx1 = a1/(1+x2^b) - k1*x1, dx2 = a2/(1+x1^g) - k2*x2.
Vec toggle_switch_field(const Vec& x, const std::map<std::string, double>& params);

/// Second-order field: dx1 = x1 - x1*x2, dx2 = x1^2 - 2*x2.
Vec second_order_field(const Vec& x);

/// Bind a SystemSpec ("toggle_switch" or "second_order") to its field.
/// Validates dimension and parameters (decay rates must be positive).
VectorField make_field(const SystemSpec& system);

/// Classical fixed-step RK4 update. Throws IntegrationError on non-finite stages.
Vec rk4_step(const VectorField& field, const Vec& x, double dt);

struct SimulateOptions {
    /// Trajectories leaving this box abort with a diagnostic. Unset disables the guard.
    std::optional<std::pair<Vec, Vec>> domain_guard;
};

/// Integrate steps RK4 updates from x0; the result has steps+1 states, state 0 == x0.
Trajectory simulate(const SystemSpec& system, const Vec& x0, double dt, long steps,
                    const std::string& id = "traj", const SimulateOptions& opts = {});

/// Deterministic lattice enumeration, first axis fastest.
/// A 1-count axis emits its lower bound.
std::vector<Vec> grid_initial_conditions(const InitialConditionGrid& grid);

/// Guard box used by simulate: the IC box scaled by `factor` about its center.
std::pair<Vec, Vec> guard_box(const InitialConditionGrid& grid, double factor);

/// Newton refinement of a fixed point of `field` from `seed` (analytic-free:
/// the Jacobian is taken by central differences).
Vec find_fixed_point(const VectorField& field, const Vec& seed,
                     double tol = 1e-13, int max_iter = 100);

/// The system's stable attractors, refined from built-in seeds, sorted by x1.
/// For toggle_switch these are near (0.16, 2) and (2, 0.16); for second_order
/// they are (-sqrt 2, 1) and (sqrt 2, 1).
std::vector<Vec> find_attractors(const SystemSpec& system);

}  // namespace koopman
