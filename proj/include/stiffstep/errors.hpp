#pragma once

#include <exception>
#include <string>
#include <string_view>
#include <utility>

namespace stiffstep {

/// Base of every error raised by the library.
///
/// Errors travel upward through stages, steps and study rows; each layer may
/// prepend its own location with add_context() so the final message reads
/// like "step 17: stage 2: Newton iteration diverged ...".
class Error : public std::exception {
public:
    explicit Error(std::string message) : message_(std::move(message)) {}

    const char* what() const noexcept override { return message_.c_str(); }

    void add_context(std::string_view context) {
        message_.insert(0, std::string(context) + ": ");
    }

private:
    std::string message_;
};

/// LU pivot fell below the relative singularity threshold.
class SingularMatrix : public Error {
public:
    using Error::Error;
};

/// A non-finite value was produced (overflow, NaN) by a right-hand side,
/// a predictor or a step.
class DomainError : public Error {
public:
    using Error::Error;
};

class NewtonDiverged : public Error {
public:
    explicit NewtonDiverged(std::string message, int iterations = 0)
        : Error(std::move(message)), iterations_(iterations) {}

    /// Newton iterations spent before giving up.
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    int iterations_ = 0;
};

/// A rational amplification factor was evaluated at (or numerically at) a pole.
class PoleEvaluation : public Error {
public:
    using Error::Error;
};

class CacheCorrupt : public Error {
public:
    using Error::Error;
};

/// Invalid user-supplied configuration (bad flag, unknown identifier, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace stiffstep
