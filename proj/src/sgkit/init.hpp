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

#include "sgkit/numkit.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace sgkit {

enum class VarianceRule {
    glorot,        // 2 / (fan_in + fan_out)
    he,            // 2 / fan_in
    orthogonal,    // orthonormal rows or columns
    prescribed,    // caller-supplied mean and variance
    legacyUniform, // 1 / (3 fan_in)
    legacyNormal,  // 1 / fan_in
};

enum class WeightDistribution { uniform, normal, bigamma };

auto toString(VarianceRule rule) -> std::string_view;
auto toString(WeightDistribution dist) -> std::string_view;
auto parseVarianceRule(std::string_view name) -> std::optional<VarianceRule>;
auto parseWeightDistribution(std::string_view name) -> std::optional<WeightDistribution>;

struct InitScheme
{
    VarianceRule rule { VarianceRule::glorot };
    WeightDistribution distribution { WeightDistribution::uniform };
    std::size_t fanIn {};
    std::size_t fanOut {};
    double mean {};     // prescribed only
    double variance {}; // prescribed only

    // Entry variance the rule asks for; for orthogonal matrices this is the
    // variance of a unit-norm row or column entry.
    [[nodiscard]] auto targetVariance(std::size_t rows, std::size_t cols) const -> double;
    auto validate() const -> void;
};

// BiGamma draws use Gamma(k, theta) magnitudes with a random sign. The
// shape is fixed and theta follows from the requested variance.
inline constexpr double biGammaShape { 2.0 };

// Zero-mean draws with the given variance.
auto sampleCentred(Rng& rng, WeightDistribution dist, double variance, std::size_t n)
  -> std::vector<double>;

// Draws a rows x cols matrix. zeroDiag clears W(i, g * rows + i) for every
// square block g after sampling. A prescribed mean is added afterwards to
// every entry that is not on such a diagonal.
auto sampleWeights(const InitScheme& scheme,
                   Rng& rng,
                   std::size_t rows,
                   std::size_t cols,
                   bool zeroDiag) -> Matrix;

// Adds targetMean to every entry. With keepDiagonal the (block) diagonal
// of a square or gate-block matrix is skipped and stays as it was.
auto prescribedShift(const Matrix& base, double targetMean, bool keepDiagonal = true)
  -> Matrix;

} // namespace sgkit
