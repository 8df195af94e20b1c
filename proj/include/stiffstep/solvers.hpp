#pragma once

#include "stiffstep/baselines.hpp"
#include "stiffstep/errors.hpp"
#include "stiffstep/newton.hpp"
#include "stiffstep/order_conditions.hpp"
#include "stiffstep/tsfo.hpp"

#include <array>
#include <string>
#include <string_view>

namespace stiffstep {

enum class SolverId { tsfo_implicit, tsfo_explicit, rk4_explicit, irk4_gauss };

inline constexpr std::array<std::string_view, 4> kSolverNames = {"tsfo-implicit", "tsfo-explicit", "rk4-explicit",
                                                                 "irk4-gauss"};

[[nodiscard]] inline std::string_view solver_name(SolverId id) { return kSolverNames[static_cast<std::size_t>(id)]; }

[[nodiscard]] inline SolverId parse_solver(std::string_view name) {
    for (std::size_t i = 0; i < kSolverNames.size(); ++i)
        if (kSolverNames[i] == name) return static_cast<SolverId>(i);
    throw ConfigError("unknown solver '" + std::string(name) + "'");
}

template <typename T = double>
[[nodiscard]] Stepper<T> make_stepper(SolverId id, const SchemeParams& params = {}, const NewtonConfig& cfg = {}) {
    switch (id) {
        case SolverId::tsfo_implicit:
            return [params, cfg](const OdeSystem<T>& sys, const Vector<T>& u, T dt) {
                auto step = step_implicit_tsfo(sys, u, dt, params, cfg);
                return StepOutcome<T>{std::move(step.state), step.stats.stage1_iters + step.stats.stage2_iters};
            };
        case SolverId::tsfo_explicit:
            return [](const OdeSystem<T>& sys, const Vector<T>& u, T dt) {
                return StepOutcome<T>{step_explicit_tsfo(sys, u, dt), 0};
            };
        case SolverId::rk4_explicit:
            return [](const OdeSystem<T>& sys, const Vector<T>& u, T dt) {
                return StepOutcome<T>{step_rk4_explicit(sys, u, dt), 0};
            };
        case SolverId::irk4_gauss:
            return [cfg](const OdeSystem<T>& sys, const Vector<T>& u, T dt) {
                auto step = step_irk4_gauss(sys, u, dt, cfg);
                return StepOutcome<T>{std::move(step.state), step.iterations};
            };
    }
    throw ConfigError("unknown solver id");
}

}  // namespace stiffstep
