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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace sgkit {

enum class SurrogateShape {
    triangular,
    exponential,
    gaussian,
    dsigmoid,
    dfastsigmoid,
    rectangular,
    qpseudospike,
};

inline constexpr std::array allSurrogateShapes {
    SurrogateShape::triangular,  SurrogateShape::exponential,
    SurrogateShape::gaussian,    SurrogateShape::dsigmoid,
    SurrogateShape::dfastsigmoid, SurrogateShape::rectangular,
    SurrogateShape::qpseudospike,
};

auto toString(SurrogateShape shape) -> std::string_view;
auto parseSurrogateShape(std::string_view name)
  -> std::optional<SurrogateShape>;

// Backward-pass stand-in for the Heaviside derivative:
// gamma * f(sharpness * v). The tail exponent q is only read by the
// q-PseudoSpike shape.
struct SurrogateSpec
{
    SurrogateShape shape { SurrogateShape::exponential };
    double gamma { 1.0 };
    double sharpness { 1.0 };
    double q { 2.0 };

    // Throws a parameter error if gamma, sharpness or q are out of range.
    auto validate() const -> void;

    auto operator==(const SurrogateSpec&) const -> bool = default;
};

// Forward spike nonlinearity, 1 iff v >= 0.
constexpr auto heaviside(double v) -> double
{
    return v >= 0.0 ? 1.0 : 0.0;
}

// Unit-scale shape f(v): even, peak f(0) = 1, unit area.
auto shapeValue(const SurrogateSpec& spec, double v) -> double;

// gamma * f(sharpness * v).
auto pseudoDerivative(const SurrogateSpec& spec, double v) -> double;

// Closed-form integral of f(v)^m over [0, v] for m in {1, 2}; odd in v and
// valid for infinite v.
auto shapePrimitive(const SurrogateSpec& spec, int m, double v) -> double;

// Integral of the unit-scale f over the real line, from the closed forms.
auto shapeArea(const SurrogateSpec& spec) -> double;

// gamma^m / (sharpness * span) * integral of f(v)^m over [vLo, vHi].
// The limits are already scaled, vLo = s (y_min - thr), vHi = s (y_max -
// thr), and span = y_max - y_min is the unscaled voltage range. The
// exponential shape uses its closed form whenever the limits straddle
// zero; everything else is integrated numerically.
auto shapeMoment(const SurrogateSpec& spec,
                 int m,
                 double vLo,
                 double vHi,
                 double span) -> double;

} // namespace sgkit
