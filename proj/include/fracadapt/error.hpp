#pragma once

#include <stdexcept>
#include <string>

namespace fracadapt {

/// Invalid arguments, unknown ids, mismatched meshes.
class InputError : public std::invalid_argument
{
public:
    explicit InputError(const std::string &what) : std::invalid_argument(what) {}
};

/// Factorization failures, iteration caps, inconsistent energies.
class NumericalError : public std::runtime_error
{
public:
    explicit NumericalError(const std::string &what, double residual = -1.0)
        : std::runtime_error(what), residual_(residual)
    {
    }

    /// Achieved relative residual, or a negative value when not applicable.
    double residual() const { return residual_; }

private:
    double residual_;
};

} // namespace fracadapt
