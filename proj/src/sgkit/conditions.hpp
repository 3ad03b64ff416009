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

// Initialization conditions for recurrent spiking layers:
//   I   each neuron fires half of the time      -> Mean[w_rec]
//   II  recurrent and input variances match      -> Var[w_rec]
//   III gradient maxima are stable over time     -> dampening gamma
//   IV  gradient variances are stable over time  -> sharpness s
// Formulas come in two flavours, subtractive and multiplicative reset.

#include "sgkit/cells.hpp"
#include "sgkit/init.hpp"
#include "sgkit/numkit.hpp"
#include "sgkit/surrogate.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgkit {

struct LayerStats
{
    double meanZ {};
    double varZ {};
    std::size_t nIn {};
    std::size_t nRec {};
    double alpha {};
    double thr {};
    // Data-driven layers stop the gradient at their input (xi = 0); a layer
    // stacked on another spiking layer passes it on (xi = 1).
    bool dataInput { true };
    double gammaIn {};     // dampening of the layer below
    double sigmaSqIn {};   // E[sigma'^2] of the layer below
    double maxWin {};      // Max[w_in]
    double eWinSq {};      // E[w_in^2]
    double varWin {};      // Var[w_in]

    [[nodiscard]] auto xi() const -> double { return dataInput ? 0.0 : 1.0; }
    auto validate() const -> void;
};

// Subtractive reset.
auto cond1MeanWrec(const LayerStats& s) -> double;
auto cond2VarWrec(const LayerStats& s, double meanWrec) -> double;
auto cond3Dampening(const LayerStats& s, double wRecMin, double wRecMax) -> double;
auto cond4TargetMoment(const LayerStats& s, double eWrecSq) -> double;

// Multiplicative reset. Condition II is shared.
auto cond1MeanWrecMultiplicative(const LayerStats& s) -> double;
auto cond3DampeningMultiplicative(const LayerStats& s, double wRecMax) -> double;
auto cond4TargetMomentMultiplicative(const LayerStats& s, double eWrecSq) -> double;

struct VoltageBounds
{
    double yMin;
    double yMax;
};

enum class BoundsMode { ensemble, perSample };

auto toString(BoundsMode mode) -> std::string_view;
auto parseBoundsMode(std::string_view name) -> std::optional<BoundsMode>;

// Extremes of the weight populations that the ensemble bound needs.
struct WeightExtremes
{
    double minWrec, maxWrec;
    double minB, maxB;
    double minWin, maxWin;
};

// Ensemble bound from population extremes: the largest drive any neuron
// could receive, accumulated geometrically through the leak.
auto voltageBoundsEnsemble(const LayerStats& s, const WeightExtremes& w, ResetKind reset)
  -> VoltageBounds;
// Per-neuron bound from the actual weights, reduced to global extremes.
auto voltageBoundsPerSample(const CellConfig& cfg, const WeightSet& w) -> VoltageBounds;

// Realized extremes of a weight set, ignoring the recurrent diagonal.
auto weightExtremes(const WeightSet& w) -> WeightExtremes;

// E[sigma'^2] for a shape at dampening gamma and sharpness s over the
// uniform voltage prior on [yMin, yMax].
auto secondMoment(const SurrogateSpec& shape,
                  double gamma,
                  double sharpness,
                  double yMin,
                  double yMax,
                  double thr) -> double;

struct SharpnessResult
{
    double sharpness {};
    double attained {};       // second moment at the returned sharpness
    bool feasible {};
    double attainedMin {};    // over the search bracket
    double attainedMax {};
    std::string reason;
};

inline constexpr double sharpnessLo { 1e-3 };
inline constexpr double sharpnessHi { 1e4 };

// Finds s with secondMoment(...) = target to 1e-4 relative. A log-uniform
// random scan of the bracket locates the first crossing, which bisection
// then refines. If the target is out of reach, the result is infeasible,
// reports the attained extremes, and carries the scanned s whose moment
// came closest.
auto solveSharpness(const SurrogateSpec& shape,
                    double gamma,
                    double target,
                    double yMin,
                    double yMax,
                    double thr,
                    Rng& rng) -> SharpnessResult;

struct ConditionMask
{
    bool c1 {};
    bool c2 {};
    bool c3 {};
    bool c4 {};

    static auto all() -> ConditionMask { return { true, true, true, true }; }
    static auto none() -> ConditionMask { return {}; }
    // Comma-separated subset of I, II, III, IV; empty or "none" for no
    // conditions, "all" for every one.
    static auto parse(std::string_view text) -> ConditionMask;
    [[nodiscard]] auto toString() const -> std::string;

    auto operator==(const ConditionMask&) const -> bool = default;
};

struct ConditionedInit
{
    double meanWrec {};
    double varWrec {};
    double gamma { 1.0 };
    double sharpness { 1.0 };
    double targetSecondMoment {};
    double attainedSecondMoment {};
    double yMin {};
    double yMax {};
    bool feasible { true };
    std::string reason;
    bool sharpnessClamped {};
    std::vector<std::string> notes;
    WeightSet weights; // sampled W_in, W_rec and zero bias
};

struct SolveOptions
{
    ConditionMask mask { ConditionMask::all() };
    ResetKind reset { ResetKind::subtractive };
    SurrogateSpec shape { SurrogateShape::exponential, 1.0, 1.0, 2.0 };
    WeightDistribution wRecDistribution { WeightDistribution::uniform };
    // Scheme for W_in; fans are filled in per layer.
    InitScheme wInScheme { VarianceRule::glorot, WeightDistribution::uniform };
    BoundsMode bounds { BoundsMode::perSample };
    // Values used when III or IV are not in the mask.
    double defaultGamma { 1.0 };
    double defaultSharpness { 1.0 };
};

// Solves the conditions bottom-up. For stacked layers the input moments are
// replaced by Mean[z] = 1/2, Var[z] = 1/4 and the gradient terms of the
// layer below are taken from its solution. Quantities outside the mask fall
// back to the naive defaults: Glorot-uniform W_rec and the default gamma
// and s (both 1 unless set).
// Hard failures still return usable fallback values but mark the layer
// infeasible with a reason.
auto solveAll(const std::vector<LayerStats>& layers, const SolveOptions& opts, Rng& rng)
  -> std::vector<ConditionedInit>;

// The same with the multiplicative-reset formulas.
auto solveAllMultiplicative(const std::vector<LayerStats>& layers,
                            SolveOptions opts,
                            Rng& rng) -> std::vector<ConditionedInit>;

} // namespace sgkit
