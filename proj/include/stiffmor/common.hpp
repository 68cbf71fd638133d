// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STIFFMOR_COMMON_HPP
#define STIFFMOR_COMMON_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace stiffmor
{

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;

//
// Error hierarchy. Configuration problems and numerical failures are kept
// apart so the CLI can map them onto distinct exit codes.
//
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

class TopologyError : public ConfigError
{
public:
    using ConfigError::ConfigError;
};

class UnknownDisturbance : public ConfigError
{
public:
    using ConfigError::ConfigError;
};

class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

class NumericalError : public Error
{
public:
    using Error::Error;
};

class NoConvergence : public NumericalError
{
public:
    NoConvergence(int iterations, double final_residual, const std::string& what = {})
        : NumericalError("no convergence after " + std::to_string(iterations) +
                         " iterations (residual " + std::to_string(final_residual) + ")" +
                         (what.empty() ? "" : ": " + what)),
          iterations_(iterations), final_residual_(final_residual)
    {
    }
    int iterations() const noexcept { return iterations_; }
    double final_residual() const noexcept { return final_residual_; }

private:
    int iterations_;
    double final_residual_;
};

class SingularJacobian : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class IndexViolation : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class DefectiveMatrix : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class ReconstructionFailure : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class IllConditionedTransform : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class UnstableSystem : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class IndefiniteGramian : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class InsufficientStates : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

/// Failure inside an integration step; carries the step index.
class StepError : public NumericalError
{
public:
    StepError(const std::string& kind, long step)
        : NumericalError(kind + " at step " + std::to_string(step)), step_(step)
    {
    }
    long step() const noexcept { return step_; }

private:
    long step_;
};

class NewtonDivergence : public StepError
{
public:
    explicit NewtonDivergence(long step) : StepError("Newton divergence", step) {}
};

class NonFiniteState : public StepError
{
public:
    explicit NonFiniteState(long step) : StepError("non-finite state", step) {}
};

/// Name and physical unit of a state, input or algebraic variable.
struct Label
{
    std::string name;
    std::string unit;
};

inline double inf_norm(const Vec& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

} // namespace stiffmor

#endif
