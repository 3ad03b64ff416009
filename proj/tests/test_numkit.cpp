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

#include "sgkit/error.hpp"
#include "sgkit/numkit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using sgkit::Matrix;

auto naiveProduct(const Matrix& a, const Matrix& b) -> Matrix
{
    Matrix c(a.rows(), b.cols());
    for (std::size_t i {}; i < a.rows(); ++i) {
        for (std::size_t j {}; j < b.cols(); ++j) {
            double acc { 0.0 };
            for (std::size_t k {}; k < a.cols(); ++k) {
                acc += a(i, k) * b(k, j);
            }
            c(i, j) = acc;
        }
    }
    return c;
}

auto randomMatrix(sgkit::Rng& rng, std::size_t r, std::size_t c) -> Matrix
{
    return Matrix(r, c, sgkit::sample(rng, sgkit::NormalDist { 0.0, 1.0 }, r * c));
}

TEST(Matmul, IdentityLeavesMatrixUnchanged)
{
    const auto a { Matrix::fromRows({ { 1.5, -2.0 }, { 0.25, 7.0 } }) };
    EXPECT_EQ(sgkit::matmul(Matrix::identity(2), a), a);
}

TEST(Matmul, HandExample)
{
    const auto a { Matrix::fromRows({ { 1, 2 }, { 3, 4 } }) };
    const auto b { Matrix::fromRows({ { 1 }, { 1 } }) };
    EXPECT_EQ(sgkit::matmul(a, b), Matrix::fromRows({ { 3 }, { 7 } }));
}

TEST(Matmul, MatchesTripleLoopBitExactly)
{
    sgkit::Rng rng { 11 };
    for (int trial {}; trial < 50; ++trial) {
        const std::size_t n { 1 + rng.next() % 9 };
        const std::size_t k { 1 + rng.next() % 9 };
        const std::size_t m { 1 + rng.next() % 9 };
        const auto a { randomMatrix(rng, n, k) };
        const auto b { randomMatrix(rng, k, m) };
        EXPECT_EQ(sgkit::matmul(a, b), naiveProduct(a, b));
    }
    const auto a { randomMatrix(rng, 5, 7) };
    const auto b { randomMatrix(rng, 7, 3) };
    EXPECT_EQ(sgkit::matmul(a, b), naiveProduct(a, b));
}

TEST(Matmul, ShapeMismatchThrows)
{
    try {
        (void)sgkit::matmul(Matrix(2, 3), Matrix(2, 3));
        FAIL();
    } catch (const sgkit::Error& e) {
        EXPECT_EQ(e.kind(), sgkit::ErrorKind::shape);
    }
}

TEST(Matmul, RowAccumulationMatchesProduct)
{
    sgkit::Rng rng { 5 };
    const auto w { randomMatrix(rng, 6, 4) };
    const auto v { randomMatrix(rng, 1, 6) };
    std::vector<double> out(4, 0.0);
    sgkit::accumulateRows(v.row(0), w, out);
    const auto ref { naiveProduct(v, w) };
    for (std::size_t j {}; j < 4; ++j) {
        EXPECT_DOUBLE_EQ(out[j], ref(0, j));
    }
    std::vector<double> back(6, 0.0);
    sgkit::accumulateCols(w, out, back);
    const auto refBack { naiveProduct(w, transpose(Matrix(1, 4, out))) };
    for (std::size_t i {}; i < 6; ++i) {
        EXPECT_NEAR(back[i], refBack(i, 0), 1e-12);
    }
}

TEST(Rng, EqualSeedsGiveEqualStreams)
{
    sgkit::Rng a { 42 };
    sgkit::Rng b { 42 };
    for (int i {}; i < 1000; ++i) {
        ASSERT_EQ(a.next(), b.next());
    }
    auto sa { a.substream("weights") };
    auto sb { b.substream("weights") };
    for (int i {}; i < 1000; ++i) {
        ASSERT_EQ(sa.next(), sb.next());
    }
}

TEST(Rng, SubstreamsIgnorePositionAndDifferByName)
{
    sgkit::Rng a { 7 };
    auto before { a.substream("x") };
    for (int i {}; i < 10; ++i) {
        (void)a.next();
    }
    auto after { a.substream("x") };
    auto other { a.substream("y") };
    EXPECT_EQ(before.next(), after.next());
    EXPECT_NE(before.next(), other.next());
    EXPECT_NE(sgkit::Rng { 7 }.substream(1).next(),
              sgkit::Rng { 7 }.substream(2).next());
}

TEST(Sample, DegenerateUniformGivesZeros)
{
    sgkit::Rng rng { 1 };
    for (const double v : sgkit::sample(rng, sgkit::UniformDist { 0.0, 0.0 }, 100)) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Sample, NormalMoments)
{
    sgkit::Rng rng { 2 };
    const auto draws { sgkit::sample(rng, sgkit::NormalDist { 0.0, 1.0 }, 1'000'000) };
    const auto s { sgkit::stats(draws) };
    EXPECT_GE(s.variance, 0.99);
    EXPECT_LE(s.variance, 1.01);
    EXPECT_NEAR(s.mean, 0.0, 0.01);
}

TEST(Sample, UniformMoments)
{
    sgkit::Rng rng { 3 };
    const auto draws { sgkit::sample(rng, sgkit::UniformDist { -2.0, 4.0 }, 1'000'000) };
    const auto s { sgkit::stats(draws) };
    EXPECT_NEAR(s.mean, 1.0, 0.01);
    EXPECT_NEAR(s.variance / 3.0, 1.0, 0.01);
    EXPECT_GE(s.min, -2.0);
    EXPECT_LT(s.max, 4.0);
}

TEST(Sample, GammaMoments)
{
    sgkit::Rng rng { 4 };
    const double theta { 0.37 };
    const auto draws { sgkit::sample(rng, sgkit::GammaDist { 2.0, theta }, 1'000'000) };
    const auto s { sgkit::stats(draws) };
    EXPECT_NEAR(s.mean / (2.0 * theta), 1.0, 0.01);
    EXPECT_NEAR(s.variance / (2.0 * theta * theta), 1.0, 0.01);
}

TEST(Sample, InvalidParametersThrow)
{
    sgkit::Rng rng { 5 };
    EXPECT_THROW((void)sgkit::sample(rng, sgkit::UniformDist { 1.0, 0.0 }, 3), sgkit::Error);
    EXPECT_THROW((void)sgkit::sample(rng, sgkit::NormalDist { 0.0, 0.0 }, 3), sgkit::Error);
    EXPECT_THROW((void)sgkit::sample(rng, sgkit::GammaDist { 0.0, 1.0 }, 3), sgkit::Error);
    EXPECT_THROW((void)sgkit::sample(rng, sgkit::GammaDist { 2.0, -1.0 }, 3), sgkit::Error);
}

TEST(Quad, ConstantIsExact)
{
    EXPECT_EQ(sgkit::quad([](double) { return 1.0; }, 0.0, 1.0, 1e-12), 1.0);
}

TEST(Quad, GaussianNormalization)
{
    const double v { sgkit::quad(
      [](double x) { return std::exp(-std::numbers::pi * x * x); }, -10.0, 10.0, 1e-12) };
    EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(Quad, TriangleArea)
{
    const double v { sgkit::quad(
      [](double x) { return std::max(1.0 - std::abs(x), 0.0); }, -6.0, 6.0, 1e-13) };
    EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Quad, PolynomialsUpToDegreeFive)
{
    sgkit::Rng rng { 9 };
    for (int trial {}; trial < 40; ++trial) {
        const auto c { sgkit::sample(rng, sgkit::UniformDist { -3.0, 3.0 }, 6) };
        const double lo { -1.0 - 2.0 * rng.uniform01() };
        const double hi { 0.5 + 3.0 * rng.uniform01() };
        auto p = [&c](double x) {
            double acc { 0.0 };
            for (std::size_t k { c.size() }; k-- > 0;) {
                acc = acc * x + c[k];
            }
            return acc;
        };
        auto primitive = [&c](double x) {
            double acc { 0.0 };
            for (std::size_t k { c.size() }; k-- > 0;) {
                acc = acc * x + c[k] / static_cast<double>(k + 1);
            }
            return acc * x;
        };
        EXPECT_NEAR(sgkit::quad(p, lo, hi, 1e-12), primitive(hi) - primitive(lo), 1e-12);
    }
}

TEST(Quad, InfiniteLimits)
{
    const double inf { std::numeric_limits<double>::infinity() };
    EXPECT_NEAR(sgkit::quad([](double x) { return std::exp(-2.0 * std::abs(x)); }, -inf, inf, 1e-12),
                1.0, 1e-10);
    EXPECT_NEAR(sgkit::quad([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, inf, 1e-12),
                std::numbers::pi / 2.0, 1e-10);
}

TEST(Quad, NonConvergenceCarriesEstimate)
{
    try {
        (void)sgkit::integrate([](double x) { return 1.0 / std::sqrt(std::abs(x)); },
                               -1.0, 1.0, 1e-14, 30);
        FAIL();
    } catch (const sgkit::QuadratureError& e) {
        EXPECT_EQ(e.kind(), sgkit::ErrorKind::quadrature);
        EXPECT_GT(e.estimate(), 0.0);
    }
}

TEST(Stats, SmallExamples)
{
    const std::vector<double> a { 1, 2, 3 };
    const auto s { sgkit::stats(a) };
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.variance, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.median, 2.0);
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.max, 3.0);
    const std::vector<double> b { 0, 1 };
    EXPECT_DOUBLE_EQ(sgkit::stats(b).median, 0.5);
}

TEST(Stats, UniformMedian)
{
    sgkit::Rng rng { 12 };
    const auto draws { sgkit::sample(rng, sgkit::UniformDist { 0.0, 1.0 }, 100'000) };
    const double median { sgkit::stats(draws).median };
    EXPECT_GE(median, 0.49);
    EXPECT_LE(median, 0.51);
}

TEST(Stats, EmptyThrowsDomainError)
{
    try {
        (void)sgkit::stats(std::vector<double> {});
        FAIL();
    } catch (const sgkit::Error& e) {
        EXPECT_EQ(e.kind(), sgkit::ErrorKind::domain);
    }
}

} // namespace
