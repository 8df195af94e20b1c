#pragma once

#include "stiffstep/errors.hpp"
#include "stiffstep/linalg.hpp"

#include <concepts>
#include <string>
#include <utility>

namespace stiffstep {

/// Stopping rule for the implicit stage solves: stop once
/// ||du||_inf < atol + rtol * ||u||_inf.
struct NewtonConfig {
    double atol = 1e-14;
    double rtol = 1e-14;
    int max_iter = 50;

    void validate() const {
        if (!(atol > 0.0)) throw ConfigError("Newton atol must be > 0");
        if (!(rtol >= 0.0)) throw ConfigError("Newton rtol must be >= 0");
        if (max_iter < 1) throw ConfigError("Newton max_iter must be >= 1");
    }
};

/// An update more than this factor larger than the first one aborts the solve.
inline constexpr double kNewtonDivergenceGrowth = 1e4;

template <typename T>
struct NewtonResult {
    Vector<T> solution;
    int iterations = 0;
    T final_update_norm{};
};

/// `residual(u)` is always called before `jacobian(u)` at the same iterate,
/// so implementations may cache the state evaluation between the two.
template <typename P, typename T>
concept NewtonSystem = requires(P p, const Vector<T>& u) {
    { p.residual(u) } -> std::convertible_to<Vector<T>>;
    { p.jacobian(u) } -> std::convertible_to<Matrix<T>>;
};

/// Full Newton: Jacobian rebuilt and refactorized at every iterate.
template <typename T, NewtonSystem<T> P>
[[nodiscard]] NewtonResult<T> newton_solve(P& system, Vector<T> u, const NewtonConfig& cfg) {
    const T atol(cfg.atol), rtol(cfg.rtol);
    T first_update(-1);
    T last_update(0);
    for (int k = 0;; ++k) {
        Vector<T> f = system.residual(u);
        if (!all_finite(f)) throw NewtonDiverged("non-finite residual at iteration " + std::to_string(k), k);
        if (k == cfg.max_iter)
            throw NewtonDiverged("no convergence after " + std::to_string(cfg.max_iter) +
                                 " iterations (last update " + std::to_string(static_cast<double>(last_update)) + ")",
                                 k);

        const T u_norm = norm_linf(u);
        Matrix<T> j = system.jacobian(u);
        f *= T(-1);
        const Vector<T> du = lu_solve(std::move(j), f);
        u += du;
        if (!all_finite(u)) throw NewtonDiverged("iterate became non-finite at iteration " + std::to_string(k + 1), k + 1);

        last_update = norm_linf(du);
        if (k == 0) {
            first_update = last_update;
        } else if (last_update > T(kNewtonDivergenceGrowth) * first_update) {
            throw NewtonDiverged("update norm grew from " + std::to_string(static_cast<double>(first_update)) +
                                 " to " + std::to_string(static_cast<double>(last_update)),
                                 k + 1);
        }
        if (last_update < atol + rtol * u_norm) return {std::move(u), k + 1, last_update};
    }
}

}  // namespace stiffstep
