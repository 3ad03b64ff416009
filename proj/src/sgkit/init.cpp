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

#include "sgkit/init.hpp"

#include "sgkit/cells.hpp"
#include "sgkit/error.hpp"

#include <cmath>

namespace sgkit {

auto toString(VarianceRule rule) -> std::string_view
{
    switch (rule) {
    case VarianceRule::glorot:
        return "glorot";
    case VarianceRule::he:
        return "he";
    case VarianceRule::orthogonal:
        return "orthogonal";
    case VarianceRule::prescribed:
        return "prescribed";
    case VarianceRule::legacyUniform:
        return "legacy-uniform";
    case VarianceRule::legacyNormal:
        return "legacy-normal";
    }
    return "unknown";
}

auto toString(WeightDistribution dist) -> std::string_view
{
    switch (dist) {
    case WeightDistribution::uniform:
        return "uniform";
    case WeightDistribution::normal:
        return "normal";
    case WeightDistribution::bigamma:
        return "bigamma";
    }
    return "unknown";
}

auto parseVarianceRule(std::string_view name) -> std::optional<VarianceRule>
{
    for (const auto rule : { VarianceRule::glorot, VarianceRule::he, VarianceRule::orthogonal,
                             VarianceRule::prescribed, VarianceRule::legacyUniform,
                             VarianceRule::legacyNormal }) {
        if (toString(rule) == name) {
            return rule;
        }
    }
    return std::nullopt;
}

auto parseWeightDistribution(std::string_view name) -> std::optional<WeightDistribution>
{
    for (const auto dist : { WeightDistribution::uniform, WeightDistribution::normal,
                             WeightDistribution::bigamma }) {
        if (toString(dist) == name) {
            return dist;
        }
    }
    return std::nullopt;
}

auto InitScheme::targetVariance(std::size_t rows, std::size_t cols) const -> double
{
    const auto in { static_cast<double>(fanIn) };
    const auto out { static_cast<double>(fanOut) };
    switch (rule) {
    case VarianceRule::glorot:
        return 2.0 / (in + out);
    case VarianceRule::he:
        return 2.0 / in;
    case VarianceRule::orthogonal:
        return 1.0 / static_cast<double>(std::max(rows, cols));
    case VarianceRule::prescribed:
        return variance;
    case VarianceRule::legacyUniform:
        return 1.0 / (3.0 * in);
    case VarianceRule::legacyNormal:
        return 1.0 / in;
    }
    return 0.0;
}

auto InitScheme::validate() const -> void
{
    switch (rule) {
    case VarianceRule::glorot:
        if (fanIn + fanOut == 0) {
            throw Error { ErrorKind::parameter, "init: Glorot needs fan counts" };
        }
        break;
    case VarianceRule::he:
    case VarianceRule::legacyUniform:
    case VarianceRule::legacyNormal:
        if (fanIn == 0) {
            throw Error { ErrorKind::parameter, "init: rule needs fan_in > 0" };
        }
        break;
    case VarianceRule::prescribed:
        if (!(variance >= 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
            throw Error { ErrorKind::parameter, "init: prescribed variance must be >= 0" };
        }
        break;
    case VarianceRule::orthogonal:
        break;
    }
}

auto sampleCentred(Rng& rng, WeightDistribution dist, double variance, std::size_t n)
  -> std::vector<double>
{
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
        throw Error { ErrorKind::parameter, "init: variance must be finite and >= 0" };
    }
    if (variance == 0.0) {
        if (dist == WeightDistribution::bigamma) {
            throw Error { ErrorKind::parameter, "init: BiGamma needs a positive variance" };
        }
        return std::vector<double>(n, 0.0);
    }
    switch (dist) {
    case WeightDistribution::uniform: {
        const double a { std::sqrt(3.0 * variance) };
        return sample(rng, UniformDist { -a, a }, n);
    }
    case WeightDistribution::normal:
        return sample(rng, NormalDist { 0.0, variance }, n);
    case WeightDistribution::bigamma: {
        // E[w^2] = k (k + 1) theta^2 for a Gamma(k, theta) magnitude.
        const double theta { std::sqrt(variance / (biGammaShape * (biGammaShape + 1.0))) };
        auto draws { sample(rng, GammaDist { biGammaShape, theta }, n) };
        for (double& w : draws) {
            if (rng.next() & 1u) {
                w = -w;
            }
        }
        return draws;
    }
    }
    return {};
}

namespace {

auto onBlockDiagonal(std::size_t r, std::size_t c, std::size_t rows, std::size_t cols) -> bool
{
    return rows > 0 && cols % rows == 0 && c % rows == r;
}

// Orthonormal columns of a tall matrix by modified Gram-Schmidt, run twice
// for accuracy. The implied triangular factor has a positive diagonal.
auto orthonormalColumns(Matrix a) -> Matrix
{
    const std::size_t rows { a.rows() };
    const std::size_t cols { a.cols() };
    for (std::size_t j {}; j < cols; ++j) {
        for (int pass {}; pass < 2; ++pass) {
            for (std::size_t k {}; k < j; ++k) {
                double dot {};
                for (std::size_t i {}; i < rows; ++i) {
                    dot += a(i, k) * a(i, j);
                }
                for (std::size_t i {}; i < rows; ++i) {
                    a(i, j) -= dot * a(i, k);
                }
            }
        }
        double norm {};
        for (std::size_t i {}; i < rows; ++i) {
            norm += a(i, j) * a(i, j);
        }
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) {
            throw Error { ErrorKind::numeric, "init: rank-deficient orthogonal draw" };
        }
        for (std::size_t i {}; i < rows; ++i) {
            a(i, j) /= norm;
        }
    }
    return a;
}

} // namespace

auto sampleWeights(const InitScheme& scheme,
                   Rng& rng,
                   std::size_t rows,
                   std::size_t cols,
                   bool zeroDiag) -> Matrix
{
    scheme.validate();
    Matrix w;
    if (scheme.rule == VarianceRule::orthogonal) {
        if (rows >= cols) {
            w = orthonormalColumns(Matrix(rows, cols, sample(rng, NormalDist { 0.0, 1.0 }, rows * cols)));
        } else {
            w = transpose(orthonormalColumns(
              Matrix(cols, rows, sample(rng, NormalDist { 0.0, 1.0 }, rows * cols))));
        }
    } else {
        w = Matrix(rows, cols,
                   sampleCentred(rng, scheme.distribution, scheme.targetVariance(rows, cols),
                                 rows * cols));
    }
    if (zeroDiag) {
        maskDiagonal(w);
    }
    if (scheme.rule == VarianceRule::prescribed && scheme.mean != 0.0) {
        w = prescribedShift(w, scheme.mean, zeroDiag);
    }
    return w;
}

auto prescribedShift(const Matrix& base, double targetMean, bool keepDiagonal) -> Matrix
{
    Matrix out { base };
    for (std::size_t r {}; r < out.rows(); ++r) {
        for (std::size_t c {}; c < out.cols(); ++c) {
            if (keepDiagonal && onBlockDiagonal(r, c, out.rows(), out.cols())) {
                continue;
            }
            out(r, c) += targetMean;
        }
    }
    return out;
}

} // namespace sgkit
