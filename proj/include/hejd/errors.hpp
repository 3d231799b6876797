// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hejd {

/// Base class of every error raised by the engine.
///
/// Each concrete error can rethrow itself with extra context appended to the
/// message while keeping its dynamic type, so callers that annotate errors
/// (e.g. with the offending randomization intensity) do not lose the
/// category the CLI uses to pick an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;

    [[noreturn]] virtual void rethrow_with_context(const std::string& context) const = 0;

    /// True for errors caused by invalid user input rather than numerics.
    virtual bool is_input_error() const noexcept { return false; }
};

namespace detail {

template <typename Derived, bool InputError = false>
class ErrorBase : public Error {
public:
    using Error::Error;

    [[noreturn]] void rethrow_with_context(const std::string& context) const override {
        throw Derived(std::string(what()) + " [" + context + "]");
    }

    bool is_input_error() const noexcept override { return InputError; }
};

}  // namespace detail

// Input validation.
class ModelError : public detail::ErrorBase<ModelError, true> { using ErrorBase::ErrorBase; };
class ConfigError : public detail::ErrorBase<ConfigError, true> { using ErrorBase::ErrorBase; };
class OrderError : public detail::ErrorBase<OrderError, true> { using ErrorBase::ErrorBase; };
class BudgetError : public detail::ErrorBase<BudgetError, true> { using ErrorBase::ErrorBase; };

// Numerical failures.
class PoleError : public detail::ErrorBase<PoleError> { using ErrorBase::ErrorBase; };
class BracketError : public detail::ErrorBase<BracketError> { using ErrorBase::ErrorBase; };
class ConvergenceError : public detail::ErrorBase<ConvergenceError> { using ErrorBase::ErrorBase; };
class SingularSystemError : public detail::ErrorBase<SingularSystemError> { using ErrorBase::ErrorBase; };
class NoBoundaryError : public detail::ErrorBase<NoBoundaryError> { using ErrorBase::ErrorBase; };
class QuadratureError : public detail::ErrorBase<QuadratureError> { using ErrorBase::ErrorBase; };

}  // namespace hejd
