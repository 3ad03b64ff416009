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

#include "sgkit/numkit.hpp"

#include "sgkit/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace sgkit {

auto toString(ErrorKind kind) -> const char*
{
    switch (kind) {
    case ErrorKind::shape:
        return "shape error";
    case ErrorKind::parameter:
        return "parameter error";
    case ErrorKind::domain:
        return "domain error";
    case ErrorKind::quadrature:
        return "quadrature error";
    case ErrorKind::numeric:
        return "numeric error";
    case ErrorKind::state:
        return "state error";
    case ErrorKind::usage:
        return "usage error";
    case ErrorKind::parse:
        return "parse error";
    case ErrorKind::format:
        return "format error";
    case ErrorKind::io:
        return "I/O error";
    case ErrorKind::config:
        return "config error";
    case ErrorKind::infeasible:
        return "infeasible";
    }
    return "error";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
  : rows_ { rows }, cols_ { cols }, data_(rows * cols, fill)
{}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
  : rows_ { rows }, cols_ { cols }, data_ { std::move(data) }
{
    if (data_.size() != rows * cols) {
        std::ostringstream msg;
        msg << "matrix data holds " << data_.size() << " values, expected "
            << rows << "x" << cols;
        throw Error { ErrorKind::shape, msg.str() };
    }
}

auto Matrix::identity(std::size_t n) -> Matrix
{
    Matrix m { n, n };
    for (std::size_t i {}; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

auto Matrix::fromRows(
  std::initializer_list<std::initializer_list<double>> rows) -> Matrix
{
    const std::size_t nRows { rows.size() };
    const std::size_t nCols { nRows == 0 ? 0 : rows.begin()->size() };
    std::vector<double> data;
    data.reserve(nRows * nCols);
    for (const auto& r : rows) {
        if (r.size() != nCols) {
            throw Error { ErrorKind::shape, "ragged matrix initializer" };
        }
        data.insert(data.end(), r.begin(), r.end());
    }
    return { nRows, nCols, std::move(data) };
}

auto Matrix::fill(double value) -> void
{
    std::fill(data_.begin(), data_.end(), value);
}

auto matmul(const Matrix& a, const Matrix& b) -> Matrix
{
    if (a.cols() != b.rows()) {
        std::ostringstream msg;
        msg << "matmul: " << a.rows() << "x" << a.cols() << " times "
            << b.rows() << "x" << b.cols();
        throw Error { ErrorKind::shape, msg.str() };
    }
    Matrix c { a.rows(), b.cols() };
    for (std::size_t i {}; i < a.rows(); ++i) {
        auto out { c.row(i) };
        for (std::size_t k {}; k < a.cols(); ++k) {
            const double aik { a(i, k) };
            const auto bk { b.row(k) };
            for (std::size_t j {}; j < b.cols(); ++j) {
                out[j] += aik * bk[j];
            }
        }
    }
    return c;
}

auto transpose(const Matrix& a) -> Matrix
{
    Matrix t { a.cols(), a.rows() };
    for (std::size_t i {}; i < a.rows(); ++i) {
        for (std::size_t j {}; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

auto allFinite(std::span<const double> v) -> bool
{
    return std::all_of(
      v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

auto allFinite(const Matrix& a) -> bool
{
    return allFinite(a.values());
}

auto accumulateRows(std::span<const double> v,
                    const Matrix& w,
                    std::span<double> out) -> void
{
    for (std::size_t i {}; i < v.size(); ++i) {
        const double vi { v[i] };
        if (vi == 0.0) {
            continue;
        }
        const auto wi { w.row(i) };
        if (vi == 1.0) {
            for (std::size_t j {}; j < out.size(); ++j) {
                out[j] += wi[j];
            }
        } else {
            for (std::size_t j {}; j < out.size(); ++j) {
                out[j] += vi * wi[j];
            }
        }
    }
}

auto accumulateCols(const Matrix& w,
                    std::span<const double> g,
                    std::span<double> out) -> void
{
    for (std::size_t i {}; i < out.size(); ++i) {
        const auto wi { w.row(i) };
        double acc {};
        for (std::size_t j {}; j < g.size(); ++j) {
            acc += wi[j] * g[j];
        }
        out[i] += acc;
    }
}

auto addOuter(std::span<const double> v,
              std::span<const double> g,
              Matrix& w) -> void
{
    for (std::size_t i {}; i < v.size(); ++i) {
        const double vi { v[i] };
        if (vi == 0.0) {
            continue;
        }
        auto wi { w.row(i) };
        for (std::size_t j {}; j < g.size(); ++j) {
            wi[j] += vi * g[j];
        }
    }
}

namespace {

auto splitmix64(std::uint64_t x) -> std::uint64_t
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

auto fnv1a(std::string_view s) -> std::uint64_t
{
    std::uint64_t h { 0xcbf29ce484222325ULL };
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

Rng::Rng(std::uint64_t seed) : seed_ { seed }, engine_ { splitmix64(seed) } {}

auto Rng::substream(std::string_view name) const -> Rng
{
    return Rng { splitmix64(seed_ ^ fnv1a(name)) };
}

auto Rng::substream(std::uint64_t index) const -> Rng
{
    return Rng { splitmix64(splitmix64(seed_) + index) };
}

auto Rng::uniform01() -> double
{
    return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
}

auto sample(Rng& rng, const Distribution& dist, std::size_t n)
  -> std::vector<double>
{
    std::vector<double> out;
    out.reserve(n);
    if (const auto* u { std::get_if<UniformDist>(&dist) }) {
        if (!(u->hi >= u->lo) || !std::isfinite(u->hi - u->lo)) {
            throw Error { ErrorKind::parameter,
                          "uniform distribution needs lo <= hi" };
        }
        const double width { u->hi - u->lo };
        for (std::size_t i {}; i < n; ++i) {
            out.push_back(u->lo + width * rng.uniform01());
        }
    } else if (const auto* g { std::get_if<NormalDist>(&dist) }) {
        if (!(g->variance > 0.0)) {
            throw Error { ErrorKind::parameter,
                          "normal distribution needs variance > 0" };
        }
        std::normal_distribution<double> d { g->mean,
                                             std::sqrt(g->variance) };
        for (std::size_t i {}; i < n; ++i) {
            out.push_back(d(rng.engine()));
        }
    } else {
        const auto& gm { std::get<GammaDist>(dist) };
        if (!(gm.shape > 0.0) || !(gm.scale > 0.0)) {
            throw Error { ErrorKind::parameter,
                          "gamma distribution needs shape > 0 and scale > 0" };
        }
        // libstdc++ implements Marsaglia-Tsang rejection sampling.
        std::gamma_distribution<double> d { gm.shape, gm.scale };
        for (std::size_t i {}; i < n; ++i) {
            out.push_back(d(rng.engine()));
        }
    }
    return out;
}

namespace {

constexpr std::array<double, 8> kronrodNodes {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000
};
constexpr std::array<double, 8> kronrodWeights {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714
};
// Gauss weights for the nodes at odd Kronrod positions 1, 3, 5 and 7.
constexpr std::array<double, 4> gaussWeights {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327
};

struct Panel
{
    double lo;
    double hi;
    double value;
    double error;

    auto operator<(const Panel& other) const -> bool
    {
        return error < other.error;
    }
};

auto gaussKronrod(const std::function<double(double)>& f, double lo, double hi)
  -> Panel
{
    const double centre { 0.5 * (lo + hi) };
    const double half { 0.5 * (hi - lo) };
    const double fc { f(centre) };
    std::array<double, 7> left {};
    std::array<double, 7> right {};
    double kronrod { fc * kronrodWeights[7] };
    double gauss { fc * gaussWeights[3] };
    for (std::size_t j {}; j < 7; ++j) {
        const double dx { half * kronrodNodes[j] };
        left[j] = f(centre - dx);
        right[j] = f(centre + dx);
        const double pair { left[j] + right[j] };
        kronrod += kronrodWeights[j] * pair;
        if (j % 2 == 1) {
            gauss += gaussWeights[j / 2] * pair;
        }
    }
    // QUADPACK error heuristic: the raw Kronrod-Gauss gap is rescaled
    // against the variation of f over the panel, which keeps the estimate
    // honest on kinks and jumps.
    const double mean { 0.5 * kronrod };
    double variation { kronrodWeights[7] * std::abs(fc - mean) };
    for (std::size_t j {}; j < 7; ++j) {
        variation += kronrodWeights[j]
                     * (std::abs(left[j] - mean) + std::abs(right[j] - mean));
    }
    variation *= std::abs(half);
    double error { std::abs((kronrod - gauss) * half) };
    if (variation != 0.0 && error != 0.0) {
        error = variation * std::min(1.0, std::pow(200.0 * error / variation, 1.5));
    }
    return { lo, hi, kronrod * half, error };
}

} // namespace

auto integrate(const std::function<double(double)>& f,
               double lo,
               double hi,
               double tol,
               std::size_t maxIntervals) -> QuadResult
{
    if (!(lo < hi)) {
        throw Error { ErrorKind::domain, "quad: requires lo < hi" };
    }
    const bool infLo { std::isinf(lo) };
    const bool infHi { std::isinf(hi) };
    std::function<double(double)> g { f };
    double a { lo };
    double b { hi };
    if (infLo && infHi) {
        g = [&f](double t) {
            const double d { 1.0 - t * t };
            const double jac { (1.0 + t * t) / (d * d) };
            if (d <= 0.0 || !std::isfinite(jac)) {
                return 0.0;
            }
            return f(t / d) * jac;
        };
        a = -1.0;
        b = 1.0;
    } else if (infHi) {
        g = [&f, lo](double t) {
            const double d { 1.0 - t };
            const double jac { 1.0 / (d * d) };
            if (d <= 0.0 || !std::isfinite(jac)) {
                return 0.0;
            }
            return f(lo + t / d) * jac;
        };
        a = 0.0;
        b = 1.0;
    } else if (infLo) {
        g = [&f, hi](double t) {
            const double d { 1.0 - t };
            const double jac { 1.0 / (d * d) };
            if (d <= 0.0 || !std::isfinite(jac)) {
                return 0.0;
            }
            return f(hi - t / d) * jac;
        };
        a = 0.0;
        b = 1.0;
    }

    std::priority_queue<Panel> active;
    std::vector<Panel> settled;
    active.push(gaussKronrod(g, a, b));
    double total { active.top().error };
    const double minWidth { (b - a) * 64.0
                            * std::numeric_limits<double>::epsilon() };
    std::size_t intervals { 1 };
    while (!active.empty() && total > tol && intervals < maxIntervals) {
        const Panel worst { active.top() };
        active.pop();
        const double mid { 0.5 * (worst.lo + worst.hi) };
        if (worst.hi - worst.lo < minWidth) {
            settled.push_back(worst);
            continue;
        }
        const Panel left { gaussKronrod(g, worst.lo, mid) };
        const Panel right { gaussKronrod(g, mid, worst.hi) };
        total += left.error + right.error - worst.error;
        active.push(left);
        active.push(right);
        ++intervals;
    }
    while (!active.empty()) {
        settled.push_back(active.top());
        active.pop();
    }
    std::sort(settled.begin(), settled.end(), [](const auto& x, const auto& y) {
        return x.lo < y.lo;
    });
    double value {};
    double error {};
    for (const auto& p : settled) {
        value += p.value;
        error += p.error;
    }
    if (!std::isfinite(value)) {
        throw QuadratureError { "quad: non-finite integrand", value, error };
    }
    if (error > tol) {
        std::ostringstream msg;
        msg << "quad: error estimate " << error << " exceeds tolerance " << tol
            << " after " << intervals << " intervals";
        throw QuadratureError { msg.str(), value, error };
    }
    return { value, error, intervals };
}

auto quad(const std::function<double(double)>& f,
          double lo,
          double hi,
          double tol) -> double
{
    return integrate(f, lo, hi, tol).value;
}

auto stats(std::span<const double> v) -> Summary
{
    if (v.empty()) {
        throw Error { ErrorKind::domain, "stats: empty input" };
    }
    const auto n { static_cast<double>(v.size()) };
    double sum {};
    for (const double x : v) {
        sum += x;
    }
    const double mean { sum / n };
    double ss {};
    for (const double x : v) {
        ss += (x - mean) * (x - mean);
    }
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid { sorted.size() / 2 };
    const double median { sorted.size() % 2 == 1
                            ? sorted[mid]
                            : 0.5 * (sorted[mid - 1] + sorted[mid]) };
    return { mean, ss / n, median, sorted.front(), sorted.back() };
}

} // namespace sgkit
