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

#include "sgkit/conditions.hpp"

#include "sgkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sgkit {

auto LayerStats::validate() const -> void
{
    if (nRec < 2) {
        throw Error { ErrorKind::domain, "conditions: n_rec must be at least 2" };
    }
    if (nIn < 1) {
        throw Error { ErrorKind::domain, "conditions: n_in must be positive" };
    }
    if (!(varZ >= 0.0) || !std::isfinite(meanZ)) {
        throw Error { ErrorKind::domain, "conditions: input statistics must be finite, Var >= 0" };
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error { ErrorKind::domain,
                      "conditions: decay must lie in (0, 1); voltage bounds diverge otherwise" };
    }
    if (!(thr >= 0.0) || !std::isfinite(thr)) {
        throw Error { ErrorKind::domain, "conditions: threshold must be finite and >= 0" };
    }
}

namespace {

auto recurrentFanIn(const LayerStats& s) -> double
{
    if (s.nRec < 2) {
        throw Error { ErrorKind::domain, "conditions: n_rec must be at least 2" };
    }
    return static_cast<double>(s.nRec - 1);
}

} // namespace

auto cond1MeanWrec(const LayerStats& s) -> double
{
    return (3.0 - 2.0 * s.alpha) * s.thr / recurrentFanIn(s);
}

auto cond2VarWrec(const LayerStats& s, double meanWrec) -> double
{
    const double n { recurrentFanIn(s) };
    return 2.0 * (s.varZ + s.meanZ * s.meanZ) * (static_cast<double>(s.nIn) / n) * s.varWin
           - 0.5 * meanWrec * meanWrec;
}

auto cond3Dampening(const LayerStats& s, double wRecMin, double wRecMax) -> double
{
    if (!(wRecMin < 0.0 && wRecMax > 0.0)) {
        throw Error { ErrorKind::domain,
                      "condition III: recurrent weights must take both signs" };
    }
    const double n { recurrentFanIn(s) };
    const double denom { n * wRecMin - s.thr };
    if (denom == 0.0) {
        throw Error { ErrorKind::domain, "condition III: singular denominator" };
    }
    const double budget { 1.0 - s.alpha
                          - s.xi() * static_cast<double>(s.nIn) * s.maxWin * s.gammaIn };
    return wRecMin / denom * (1.0 / wRecMax) * budget;
}

auto cond4TargetMoment(const LayerStats& s, double eWrecSq) -> double
{
    const double n { recurrentFanIn(s) };
    const double denom { n * eWrecSq + s.thr * s.thr };
    if (!(denom > 0.0)) {
        throw Error { ErrorKind::domain, "condition IV: denominator must be positive" };
    }
    return (1.0 - s.alpha * s.alpha
            - s.xi() * static_cast<double>(s.nIn) * s.eWinSq * s.sigmaSqIn)
           / denom;
}

auto cond1MeanWrecMultiplicative(const LayerStats& s) -> double
{
    return (1.0 - s.alpha) * s.thr / recurrentFanIn(s);
}

auto cond3DampeningMultiplicative(const LayerStats& s, double wRecMax) -> double
{
    if (!(wRecMax > 0.0)) {
        throw Error { ErrorKind::domain, "condition III: needs a positive recurrent maximum" };
    }
    const double n { recurrentFanIn(s) };
    const double budget { 1.0 - s.alpha
                          - s.xi() * static_cast<double>(s.nIn) * s.maxWin * s.gammaIn };
    return budget / (n * wRecMax);
}

auto cond4TargetMomentMultiplicative(const LayerStats& s, double eWrecSq) -> double
{
    const double n { recurrentFanIn(s) };
    const double denom { n * eWrecSq };
    if (!(denom > 0.0)) {
        throw Error { ErrorKind::domain, "condition IV: denominator must be positive" };
    }
    return (1.0 - 0.5 * s.alpha * s.alpha
            - s.xi() * static_cast<double>(s.nIn) * s.eWinSq * s.sigmaSqIn)
           / denom;
}

auto toString(BoundsMode mode) -> std::string_view
{
    return mode == BoundsMode::ensemble ? "ensemble" : "per-sample";
}

auto parseBoundsMode(std::string_view name) -> std::optional<BoundsMode>
{
    if (name == "ensemble") {
        return BoundsMode::ensemble;
    }
    if (name == "per-sample") {
        return BoundsMode::perSample;
    }
    return std::nullopt;
}

namespace {

auto requireContractive(double alpha) -> void
{
    if (!(alpha < 1.0)) {
        throw Error { ErrorKind::domain, "voltage bounds: decay >= 1 gives divergent bounds" };
    }
}

} // namespace

auto voltageBoundsEnsemble(const LayerStats& s, const WeightExtremes& w, ResetKind reset)
  -> VoltageBounds
{
    requireContractive(s.alpha);
    const double n { recurrentFanIn(s) };
    const double in { static_cast<double>(s.nIn) };
    const double up { n * w.maxWrec + w.maxB + in * w.maxWin };
    const double down { n * w.minWrec + w.minB + in * w.minWin };
    if (reset == ResetKind::subtractive) {
        return { (down - s.thr) / (1.0 - s.alpha), up / (1.0 - s.alpha) };
    }
    const double gain { s.alpha / (1.0 - s.alpha) };
    return { gain * down, gain * up };
}

auto voltageBoundsPerSample(const CellConfig& cfg, const WeightSet& w) -> VoltageBounds
{
    if (cfg.kind == CellKind::slstm) {
        throw Error { ErrorKind::usage, "voltage bounds: not defined for sLSTM cells" };
    }
    if (w.wRec.rows() != cfg.nRec || w.wRec.cols() != cfg.nRec || w.wIn.cols() != cfg.nRec
        || w.wIn.rows() != cfg.nIn || w.b.size() != cfg.nRec || cfg.alpha.size() != cfg.nRec
        || cfg.thr.size() != cfg.nRec) {
        throw Error { ErrorKind::shape, "voltage bounds: shapes do not match the cell" };
    }
    double yMin { std::numeric_limits<double>::infinity() };
    double yMax { -std::numeric_limits<double>::infinity() };
    for (std::size_t i {}; i < cfg.nRec; ++i) {
        requireContractive(cfg.alpha[i]);
        double up { w.b[i] };
        double down { w.b[i] };
        for (std::size_t j {}; j < cfg.nRec; ++j) {
            up += std::max(w.wRec(j, i), 0.0);
            down -= std::max(-w.wRec(j, i), 0.0);
        }
        for (std::size_t j {}; j < cfg.nIn; ++j) {
            up += std::max(w.wIn(j, i), 0.0);
            down -= std::max(-w.wIn(j, i), 0.0);
        }
        const double a { cfg.alpha[i] };
        double hi {};
        double lo {};
        if (cfg.reset == ResetKind::subtractive) {
            hi = up / (1.0 - a);
            lo = (down - cfg.thr[i]) / (1.0 - a);
        } else {
            hi = a / (1.0 - a) * up;
            lo = a / (1.0 - a) * down;
        }
        yMax = std::max(yMax, hi);
        yMin = std::min(yMin, lo);
    }
    return { yMin, yMax };
}

auto weightExtremes(const WeightSet& w) -> WeightExtremes
{
    constexpr double inf { std::numeric_limits<double>::infinity() };
    WeightExtremes e { inf, -inf, inf, -inf, inf, -inf };
    const std::size_t n { w.wRec.rows() };
    for (std::size_t r {}; r < n; ++r) {
        for (std::size_t c {}; c < w.wRec.cols(); ++c) {
            if (c % n == r) {
                continue;
            }
            e.minWrec = std::min(e.minWrec, w.wRec(r, c));
            e.maxWrec = std::max(e.maxWrec, w.wRec(r, c));
        }
    }
    for (const double v : w.b) {
        e.minB = std::min(e.minB, v);
        e.maxB = std::max(e.maxB, v);
    }
    for (const double v : w.wIn.values()) {
        e.minWin = std::min(e.minWin, v);
        e.maxWin = std::max(e.maxWin, v);
    }
    return e;
}

auto secondMoment(const SurrogateSpec& shape,
                  double gamma,
                  double sharpness,
                  double yMin,
                  double yMax,
                  double thr) -> double
{
    const SurrogateSpec spec { shape.shape, gamma, sharpness, shape.q };
    return shapeMoment(spec, 2, sharpness * (yMin - thr), sharpness * (yMax - thr), yMax - yMin);
}

auto solveSharpness(const SurrogateSpec& shape,
                    double gamma,
                    double target,
                    double yMin,
                    double yMax,
                    double thr,
                    Rng& rng) -> SharpnessResult
{
    if (!(target > 0.0) || !std::isfinite(target)) {
        throw Error { ErrorKind::domain, "solveSharpness: target must be positive" };
    }
    if (!(yMin < yMax)) {
        throw Error { ErrorKind::domain, "solveSharpness: needs y_min < y_max" };
    }
    if (!(gamma > 0.0)) {
        throw Error { ErrorKind::domain, "solveSharpness: dampening must be positive" };
    }
    constexpr std::size_t samples { 256 };
    constexpr double tol { 1e-4 };
    const double logLo { std::log(sharpnessLo) };
    const double logHi { std::log(sharpnessHi) };

    std::vector<double> grid { sharpnessLo, sharpnessHi };
    while (grid.size() < samples) {
        grid.push_back(std::exp(logLo + (logHi - logLo) * rng.uniform01()));
    }
    std::sort(grid.begin(), grid.end());

    auto moment = [&](double s) { return secondMoment(shape, gamma, s, yMin, yMax, thr); };
    auto close = [&](double m) { return std::abs(m - target) <= tol * target; };

    SharpnessResult result;
    result.attainedMin = std::numeric_limits<double>::infinity();
    result.attainedMax = -std::numeric_limits<double>::infinity();
    std::vector<double> values(grid.size());
    for (std::size_t i {}; i < grid.size(); ++i) {
        values[i] = moment(grid[i]);
        result.attainedMin = std::min(result.attainedMin, values[i]);
        result.attainedMax = std::max(result.attainedMax, values[i]);
    }

    for (std::size_t i {}; i < grid.size(); ++i) {
        if (close(values[i])) {
            result.sharpness = grid[i];
            result.attained = values[i];
            result.feasible = true;
            return result;
        }
        if (i + 1 < grid.size() && (values[i] - target) * (values[i + 1] - target) < 0.0) {
            double lo { std::log(grid[i]) };
            double hi { std::log(grid[i + 1]) };
            const bool fallsThrough { values[i] > target };
            for (int it {}; it < 60; ++it) {
                const double mid { 0.5 * (lo + hi) };
                const double m { moment(std::exp(mid)) };
                if ((m > target) == fallsThrough) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            const double sLo { std::exp(lo) };
            const double sHi { std::exp(hi) };
            const double mLo { moment(sLo) };
            const double mHi { moment(sHi) };
            const bool pickLo { std::abs(mLo - target) <= std::abs(mHi - target) };
            result.sharpness = pickLo ? sLo : sHi;
            result.attained = pickLo ? mLo : mHi;
            result.feasible = close(result.attained);
            if (!result.feasible) {
                result.reason = "moment is discontinuous at the crossing";
            }
            return result;
        }
    }

    std::size_t best {};
    for (std::size_t i { 1 }; i < grid.size(); ++i) {
        if (std::abs(values[i] - target) < std::abs(values[best] - target)) {
            best = i;
        }
    }
    result.sharpness = grid[best];
    result.attained = values[best];
    result.feasible = false;
    std::ostringstream msg;
    msg.precision(6);
    msg << "target " << target << " outside attainable range [" << result.attainedMin << ", "
        << result.attainedMax << "] for s in [" << sharpnessLo << ", " << sharpnessHi << "]";
    result.reason = msg.str();
    return result;
}

auto ConditionMask::parse(std::string_view text) -> ConditionMask
{
    ConditionMask mask;
    if (text == "all") {
        return all();
    }
    if (text.empty() || text == "none") {
        return mask;
    }
    std::size_t start {};
    while (start <= text.size()) {
        const auto comma { text.find(',', start) };
        const auto token { text.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start) };
        if (token == "I") {
            mask.c1 = true;
        } else if (token == "II") {
            mask.c2 = true;
        } else if (token == "III") {
            mask.c3 = true;
        } else if (token == "IV") {
            mask.c4 = true;
        } else {
            throw Error { ErrorKind::config,
                          "condition mask: unknown entry '" + std::string { token }
                            + "' (use I, II, III, IV, all or none)" };
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return mask;
}

auto ConditionMask::toString() const -> std::string
{
    std::string out;
    const std::pair<bool, const char*> parts[] { { c1, "I" }, { c2, "II" }, { c3, "III" },
                                                 { c4, "IV" } };
    for (const auto& [on, name] : parts) {
        if (on) {
            out += out.empty() ? "" : ",";
            out += name;
        }
    }
    return out.empty() ? "none" : out;
}

namespace {

auto markInfeasible(ConditionedInit& out, const std::string& why) -> void
{
    if (out.feasible) {
        out.feasible = false;
        out.reason = why;
    } else {
        out.reason += "; " + why;
    }
}

struct Formulas
{
    double (*cond1)(const LayerStats&);
    double (*cond4)(const LayerStats&, double);
    bool multiplicative;
};

auto solveLayers(const std::vector<LayerStats>& layers,
                 const SolveOptions& opts,
                 Rng& rng,
                 const Formulas& formulas) -> std::vector<ConditionedInit>
{
    opts.shape.validate();
    std::vector<ConditionedInit> out;
    for (std::size_t l {}; l < layers.size(); ++l) {
        LayerStats stats { layers[l] };
        if (!stats.dataInput) {
            if (l == 0) {
                throw Error { ErrorKind::domain,
                              "conditions: the first layer must take data input" };
            }
            stats.meanZ = 0.5;
            stats.varZ = 0.25;
            stats.gammaIn = out.back().gamma;
            stats.sigmaSqIn = out.back().attainedSecondMoment;
        } else {
            stats.gammaIn = 0.0;
            stats.sigmaSqIn = 0.0;
        }
        stats.validate();
        if (l > 0 && stats.nIn != layers[l - 1].nRec) {
            throw Error { ErrorKind::shape, "conditions: layer widths do not chain" };
        }

        auto layerRng { rng.substream("layer").substream(l) };
        auto inRng { layerRng.substream("w_in") };
        auto recRng { layerRng.substream("w_rec") };
        auto sharpRng { layerRng.substream("sharpness") };

        ConditionedInit res;
        res.gamma = opts.defaultGamma;
        res.sharpness = opts.defaultSharpness;
        const auto& mask { opts.mask };

        InitScheme inScheme { opts.wInScheme };
        inScheme.fanIn = stats.nIn;
        inScheme.fanOut = stats.nRec;
        res.weights.wIn = sampleWeights(inScheme, inRng, stats.nIn, stats.nRec, false);
        res.weights.b.assign(stats.nRec, 0.0);
        stats.varWin = inScheme.targetVariance(stats.nIn, stats.nRec);
        stats.eWinSq = stats.varWin + inScheme.mean * inScheme.mean;
        stats.maxWin = *std::max_element(res.weights.wIn.values().begin(),
                                         res.weights.wIn.values().end());

        const double naiveVar { 2.0 / (2.0 * static_cast<double>(stats.nRec)) };
        res.meanWrec = mask.c1 ? formulas.cond1(stats) : 0.0;
        res.varWrec = mask.c2 ? cond2VarWrec(stats, res.meanWrec) : naiveVar;
        if (res.varWrec < 0.0) {
            res.varWrec = 0.0;
            markInfeasible(res, "CI mean dominates CII budget");
        }
        const InitScheme recScheme { VarianceRule::prescribed,
                                     mask.c1 || mask.c2 ? opts.wRecDistribution
                                                        : WeightDistribution::uniform,
                                     stats.nRec,
                                     stats.nRec,
                                     res.meanWrec,
                                     res.varWrec };
        res.weights.wRec = sampleWeights(recScheme, recRng, stats.nRec, stats.nRec, true);
        const auto extremes { weightExtremes(res.weights) };

        CellConfig cfg;
        cfg.nIn = stats.nIn;
        cfg.nRec = stats.nRec;
        cfg.alpha.assign(stats.nRec, stats.alpha);
        cfg.thr.assign(stats.nRec, stats.thr);
        cfg.reset = formulas.multiplicative ? ResetKind::multiplicative : ResetKind::subtractive;
        const auto bounds { opts.bounds == BoundsMode::perSample
                              ? voltageBoundsPerSample(cfg, res.weights)
                              : voltageBoundsEnsemble(stats, extremes, cfg.reset) };
        res.yMin = bounds.yMin;
        res.yMax = bounds.yMax;

        if (mask.c3) {
            auto dampening = [&](const LayerStats& s) {
                return formulas.multiplicative
                         ? cond3DampeningMultiplicative(s, extremes.maxWrec)
                         : cond3Dampening(s, extremes.minWrec, extremes.maxWrec);
            };
            try {
                res.gamma = dampening(stats);
                if (!(res.gamma > 0.0)) {
                    markInfeasible(res, "CIII gradient-maximum budget exhausted by the layer below");
                    LayerStats isolated { stats };
                    isolated.dataInput = true;
                    res.gamma = dampening(isolated);
                    res.notes.push_back("gamma computed without the cross-layer term");
                    if (!(res.gamma > 0.0)) {
                        res.gamma = 1.0;
                        res.notes.push_back("gamma reset to 1");
                    }
                }
            } catch (const Error& e) {
                markInfeasible(res, e.what());
                res.gamma = 1.0;
                res.notes.push_back("gamma reset to 1");
            }
        }

        if (mask.c4) {
            const double eWrecSq { res.varWrec + res.meanWrec * res.meanWrec };
            res.targetSecondMoment = formulas.cond4(stats, eWrecSq);
            if (!(res.targetSecondMoment > 0.0)) {
                markInfeasible(res, "CIV vanishing-gradient budget exhausted");
                LayerStats isolated { stats };
                isolated.dataInput = true;
                res.targetSecondMoment = formulas.cond4(isolated, eWrecSq);
                res.notes.push_back("target computed without the cross-layer term");
            }
            if (res.targetSecondMoment > 0.0 && res.yMin < res.yMax) {
                const auto solved { solveSharpness(opts.shape, res.gamma, res.targetSecondMoment,
                                                   res.yMin, res.yMax, stats.thr, sharpRng) };
                res.sharpness = solved.sharpness;
                if (!solved.feasible) {
                    res.sharpnessClamped = true;
                    res.notes.push_back("sharpness clamped: " + solved.reason);
                }
            } else {
                markInfeasible(res, "no sharpness can meet a non-positive target");
            }
        }
        if (res.yMin < res.yMax) {
            res.attainedSecondMoment
              = secondMoment(opts.shape, res.gamma, res.sharpness, res.yMin, res.yMax, stats.thr);
        }
        if (!res.feasible) {
            res.reason = "layer " + std::to_string(l) + ": " + res.reason;
        }
        out.push_back(std::move(res));
    }
    return out;
}

} // namespace

auto solveAll(const std::vector<LayerStats>& layers, const SolveOptions& opts, Rng& rng)
  -> std::vector<ConditionedInit>
{
    if (opts.reset == ResetKind::multiplicative) {
        return solveAllMultiplicative(layers, opts, rng);
    }
    return solveLayers(layers, opts, rng, { cond1MeanWrec, cond4TargetMoment, false });
}

auto solveAllMultiplicative(const std::vector<LayerStats>& layers,
                            SolveOptions opts,
                            Rng& rng) -> std::vector<ConditionedInit>
{
    opts.reset = ResetKind::multiplicative;
    return solveLayers(layers, opts, rng,
                       { cond1MeanWrecMultiplicative, cond4TargetMomentMultiplicative, true });
}

} // namespace sgkit
