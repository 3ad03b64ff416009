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

#include "sgkit/surrogate.hpp"

#include "sgkit/error.hpp"
#include "sgkit/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace sgkit {

auto toString(SurrogateShape shape) -> std::string_view
{
    switch (shape) {
    case SurrogateShape::triangular:
        return "triangular";
    case SurrogateShape::exponential:
        return "exponential";
    case SurrogateShape::gaussian:
        return "gaussian";
    case SurrogateShape::dsigmoid:
        return "dsigmoid";
    case SurrogateShape::dfastsigmoid:
        return "dfastsigmoid";
    case SurrogateShape::rectangular:
        return "rectangular";
    case SurrogateShape::qpseudospike:
        return "qpseudospike";
    }
    return "unknown";
}

auto parseSurrogateShape(std::string_view name)
  -> std::optional<SurrogateShape>
{
    for (const auto shape : allSurrogateShapes) {
        if (toString(shape) == name) {
            return shape;
        }
    }
    return std::nullopt;
}

auto SurrogateSpec::validate() const -> void
{
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error { ErrorKind::parameter, "surrogate: dampening must be > 0" };
    }
    if (!(sharpness > 0.0) || !std::isfinite(sharpness)) {
        throw Error { ErrorKind::parameter, "surrogate: sharpness must be > 0" };
    }
    if (shape == SurrogateShape::qpseudospike && !(q > 1.0)) {
        throw Error { ErrorKind::parameter,
                      "surrogate: q-PseudoSpike needs tail q > 1" };
    }
}

namespace {

auto polyTail(double a, double q) -> double
{
    return std::pow(1.0 + 2.0 * a / (q - 1.0), -q);
}

} // namespace

auto shapeValue(const SurrogateSpec& spec, double v) -> double
{
    const double a { std::abs(v) };
    switch (spec.shape) {
    case SurrogateShape::triangular:
        return std::max(1.0 - a, 0.0);
    case SurrogateShape::exponential:
        return std::exp(-2.0 * a);
    case SurrogateShape::gaussian:
        return std::exp(-std::numbers::pi * a * a);
    case SurrogateShape::dsigmoid: {
        const double e { std::exp(-4.0 * a) };
        return 4.0 * e / ((1.0 + e) * (1.0 + e));
    }
    case SurrogateShape::dfastsigmoid: {
        const double d { 1.0 + 2.0 * a };
        return 1.0 / (d * d);
    }
    case SurrogateShape::rectangular:
        return a < 0.5 ? 1.0 : 0.0;
    case SurrogateShape::qpseudospike:
        return polyTail(a, spec.q);
    }
    return 0.0;
}

auto pseudoDerivative(const SurrogateSpec& spec, double v) -> double
{
    return spec.gamma * shapeValue(spec, spec.sharpness * v);
}

auto shapePrimitive(const SurrogateSpec& spec, int m, double v) -> double
{
    if (m != 1 && m != 2) {
        throw Error { ErrorKind::domain, "shapePrimitive: m must be 1 or 2" };
    }
    const double sign { v < 0.0 ? -1.0 : 1.0 };
    const double a { std::abs(v) };
    const double md { static_cast<double>(m) };
    double value {};
    switch (spec.shape) {
    case SurrogateShape::triangular: {
        const double b { std::min(a, 1.0) };
        const double r { 1.0 - b };
        value = m == 1 ? b - 0.5 * b * b : (1.0 - r * r * r) / 3.0;
        break;
    }
    case SurrogateShape::exponential:
        value = -std::expm1(-2.0 * md * a) / (2.0 * md);
        break;
    case SurrogateShape::gaussian:
        value = std::erf(std::sqrt(md * std::numbers::pi) * a)
                / (2.0 * std::sqrt(md));
        break;
    case SurrogateShape::dsigmoid: {
        // With u = sigmoid(4v): du/dv = 4u(1-u), so f dv = du and
        // f^2 dv = 4u(1-u) du.
        const double u { 1.0 / (1.0 + std::exp(-4.0 * a)) };
        if (m == 1) {
            value = u - 0.5;
        } else {
            const auto antiderivative = [](double x) {
                return 2.0 * x * x - 4.0 / 3.0 * x * x * x;
            };
            value = antiderivative(u) - antiderivative(0.5);
        }
        break;
    }
    case SurrogateShape::dfastsigmoid:
    case SurrogateShape::qpseudospike: {
        const double q { spec.shape == SurrogateShape::dfastsigmoid ? 2.0
                                                                   : spec.q };
        const double c { 2.0 / (q - 1.0) };
        const double p { q * md };
        value = (1.0 - std::pow(1.0 + c * a, 1.0 - p)) / (c * (p - 1.0));
        break;
    }
    case SurrogateShape::rectangular:
        value = std::min(a, 0.5);
        break;
    }
    return sign * value;
}

auto shapeArea(const SurrogateSpec& spec) -> double
{
    constexpr double inf { std::numeric_limits<double>::infinity() };
    return shapePrimitive(spec, 1, inf) - shapePrimitive(spec, 1, -inf);
}

namespace {

auto breakpoints(SurrogateShape shape) -> std::vector<double>
{
    switch (shape) {
    case SurrogateShape::triangular:
        return { -1.0, 0.0, 1.0 };
    case SurrogateShape::rectangular:
        return { -0.5, 0.0, 0.5 };
    default:
        return { 0.0 };
    }
}

} // namespace

auto shapeMoment(const SurrogateSpec& spec,
                 int m,
                 double vLo,
                 double vHi,
                 double span) -> double
{
    if (m != 1 && m != 2) {
        throw Error { ErrorKind::domain, "shapeMoment: m must be 1 or 2" };
    }
    if (!(vLo < vHi)) {
        throw Error { ErrorKind::domain, "shapeMoment: requires vLo < vHi" };
    }
    if (!(span > 0.0)) {
        throw Error { ErrorKind::domain, "shapeMoment: span must be > 0" };
    }
    const double md { static_cast<double>(m) };
    double integral {};
    if (spec.shape == SurrogateShape::exponential && vLo < 0.0 && vHi > 0.0) {
        integral = -std::exp(-2.0 * md * std::abs(vHi)) / (2.0 * md)
                   - std::exp(-2.0 * md * std::abs(vLo)) / (2.0 * md)
                   + 1.0 / md;
    } else {
        auto integrand = [&spec, m](double v) {
            const double f { shapeValue(spec, v) };
            return m == 1 ? f : f * f;
        };
        std::vector<double> cuts { vLo };
        for (const double b : breakpoints(spec.shape)) {
            if (b > vLo && b < vHi) {
                cuts.push_back(b);
            }
        }
        cuts.push_back(vHi);
        for (std::size_t i {}; i + 1 < cuts.size(); ++i) {
            integral += integrate(integrand, cuts[i], cuts[i + 1], 1e-13).value;
        }
    }
    return std::pow(spec.gamma, md) / (spec.sharpness * span) * integral;
}

} // namespace sgkit
