#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "stefan/error.hpp"
#include "stefan/grid.hpp"
#include "stefan/kinetics.hpp"

namespace stefan {

struct GridSpec {
    double L = 40.0;
    double dx = 0.02;

    GridPtr make() const { return SpatialGrid::uniform(L, dx); }
};

struct SolverSettings {
    double dt = 1e-3;
    double picard_tol = 1e-10;
    int max_picard_iters = 50;
    /// Largest admitted truncation error of the initial-data integral.
    double tail_tolerance = 1e-8;
};

/// Heat-loss coefficient, kinetics and discretization.
struct ProblemParams {
    double gamma;
    KineticsModel kinetics;
    GridSpec grid{};
    SolverSettings solver{};

    ProblemParams(double gamma_, KineticsModel k, GridSpec g = {}, SolverSettings s = {})
        : gamma(gamma_), kinetics(std::move(k)), grid(g), solver(s) {
        validate();
    }

    void validate() const {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
        if (!(grid.L > 0.0) || !(grid.dx > 0.0)) throw ParameterError("grid: L and dx must be positive");
        if (!(solver.dt > 0.0)) throw ParameterError("solver: dt must be positive");
        if (!(solver.picard_tol > 0.0)) throw ParameterError("solver: picard_tol must be positive");
        if (solver.max_picard_iters < 1) throw ParameterError("solver: max_picard_iters must be >= 1");
    }
};

/// gamma = 0.1 with Arrhenius V0 = 2, A = 1, u_inf = -1.
inline ProblemParams baseline_params() { return ProblemParams(0.1, KineticsModel::arrhenius(2.0, 1.0, -1.0)); }

}  // namespace stefan
