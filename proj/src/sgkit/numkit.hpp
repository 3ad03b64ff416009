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

// Small dense numerical kernel shared by the rest of the library. Values
// are 64-bit throughout and every reduction runs in a fixed order so that
// reruns are bit-identical.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace sgkit {

class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static auto identity(std::size_t n) -> Matrix;
    static auto fromRows(
      std::initializer_list<std::initializer_list<double>> rows) -> Matrix;

    [[nodiscard]] auto rows() const noexcept -> std::size_t { return rows_; }
    [[nodiscard]] auto cols() const noexcept -> std::size_t { return cols_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t
    {
        return data_.size();
    }
    [[nodiscard]] auto empty() const noexcept -> bool
    {
        return data_.empty();
    }

    auto operator()(std::size_t r, std::size_t c) -> double&
    {
        return data_[r * cols_ + c];
    }
    auto operator()(std::size_t r, std::size_t c) const -> double
    {
        return data_[r * cols_ + c];
    }

    auto row(std::size_t r) -> std::span<double>
    {
        return { data_.data() + r * cols_, cols_ };
    }
    [[nodiscard]] auto row(std::size_t r) const -> std::span<const double>
    {
        return { data_.data() + r * cols_, cols_ };
    }

    auto values() -> std::span<double> { return data_; }
    [[nodiscard]] auto values() const -> std::span<const double>
    {
        return data_;
    }

    auto fill(double value) -> void;

    auto operator==(const Matrix&) const -> bool = default;

private:
    std::size_t rows_ {};
    std::size_t cols_ {};
    std::vector<double> data_;
};

// c(i,j) = sum_k a(i,k) b(k,j), accumulated for increasing k starting from
// zero. Throws a shape error if a.cols() != b.rows().
auto matmul(const Matrix& a, const Matrix& b) -> Matrix;
auto transpose(const Matrix& a) -> Matrix;
auto allFinite(const Matrix& a) -> bool;
auto allFinite(std::span<const double> v) -> bool;

// out += v * W, i.e. out(j) += sum_i v(i) W(i,j). Zero entries of v are
// skipped, which makes binary spike vectors cheap.
auto accumulateRows(std::span<const double> v,
                    const Matrix& w,
                    std::span<double> out) -> void;
// out(i) += sum_j W(i,j) g(j), i.e. out += W g.
auto accumulateCols(const Matrix& w,
                    std::span<const double> g,
                    std::span<double> out) -> void;
// W(i,:) += v(i) * g for every nonzero v(i).
auto addOuter(std::span<const double> v,
              std::span<const double> g,
              Matrix& w) -> void;

// Seeded generator. Substreams are derived from (seed, name) only, never
// from the current position, so splitting is order independent.
class Rng
{
public:
    explicit Rng(std::uint64_t seed);

    [[nodiscard]] auto seed() const noexcept -> std::uint64_t
    {
        return seed_;
    }
    [[nodiscard]] auto substream(std::string_view name) const -> Rng;
    [[nodiscard]] auto substream(std::uint64_t index) const -> Rng;

    auto next() -> std::uint64_t { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    auto uniform01() -> double;
    auto engine() -> std::mt19937_64& { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

struct UniformDist
{
    double lo;
    double hi;
};

struct NormalDist
{
    double mean;
    double variance;
};

// Gamma with shape k and scale theta (mean k*theta).
struct GammaDist
{
    double shape;
    double scale;
};

using Distribution = std::variant<UniformDist, NormalDist, GammaDist>;

auto sample(Rng& rng, const Distribution& dist, std::size_t n)
  -> std::vector<double>;

// Globally adaptive Gauss-Kronrod 7/15 quadrature. Infinite limits are
// mapped onto finite intervals. Throws QuadratureError (carrying the best
// estimate) when the requested absolute tolerance cannot be reached.
struct QuadResult
{
    double value;
    double error;
    std::size_t intervals;
};

auto integrate(const std::function<double(double)>& f,
               double lo,
               double hi,
               double tol,
               std::size_t maxIntervals = 4000) -> QuadResult;

auto quad(const std::function<double(double)>& f,
          double lo,
          double hi,
          double tol) -> double;

struct Summary
{
    double mean;
    double variance; // population variance
    double median;   // midpoint of the two central values for even n
    double min;
    double max;
};

auto stats(std::span<const double> v) -> Summary;

} // namespace sgkit
