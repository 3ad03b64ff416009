// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace sgkit {

enum class ErrorKind {
    shape,
    parameter,
    domain,
    quadrature,
    numeric,
    state,
    usage,
    parse,
    format,
    io,
    config,
    infeasible,
};

auto toString(ErrorKind kind) -> const char*;

// Every failure raised by the library core carries a kind so that the C
// boundary can map it onto a status code without string matching.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
      : std::runtime_error { what }, kind_ { kind }
    {}

    [[nodiscard]] auto kind() const noexcept -> ErrorKind { return kind_; }

private:
    ErrorKind kind_;
};

// Raised when adaptive refinement runs out of budget. The best estimate
// obtained so far is kept so that callers may decide to accept it.
class QuadratureError : public Error
{
public:
    QuadratureError(const std::string& what, double estimate, double error)
      : Error { ErrorKind::quadrature, what }, estimate_ { estimate },
        error_ { error }
    {}

    [[nodiscard]] auto estimate() const noexcept -> double
    {
        return estimate_;
    }
    [[nodiscard]] auto errorEstimate() const noexcept -> double
    {
        return error_;
    }

private:
    double estimate_;
    double error_;
};

} // namespace sgkit
