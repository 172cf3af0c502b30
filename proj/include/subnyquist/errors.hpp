// SPDX-License-Identifier: Apache-2.0
//
// subnyquist: multipath delay estimation from low-rate filter-bank samples
// Copyright (C) 2026 The subnyquist authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SUBNYQUIST_ERRORS_HPP
#define SUBNYQUIST_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subnyquist
{

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (e.g. a delay outside [0,T)).
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration (sizes, grids, counts).
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// Numerical failures. The CLI maps every subclass to exit code 3.
class NumericalError : public Error
{
public:
    using Error::Error;
};

/// The delay model is degenerate (duplicate delays, rank-deficient steering matrix).
class DegenerateModelError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

/// The pulse spectrum violates 0 < a <= |G(w)| on the working band.
class IllConditionedPulseError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

/// The mixing matrix W(e^{jwT}) is numerically singular at some grid bin.
class FrontendSingularError : public NumericalError
{
public:
    FrontendSingularError(std::size_t bin, const std::string &what)
        : NumericalError("front end singular at grid bin " + std::to_string(bin) + ": " + what), bin_(bin)
    {
    }

    std::size_t bin() const noexcept { return bin_; }

private:
    std::size_t bin_;
};

/// Not enough sampling channels for the requested operation.
class InsufficientChannelsError : public ConfigError
{
public:
    using ConfigError::ConfigError;
};

/// The signal subspace has fewer than K significant directions.
class RankDeficientError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

} // namespace subnyquist

#endif // SUBNYQUIST_ERRORS_HPP
