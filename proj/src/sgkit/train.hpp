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

#include "sgkit/bptt.hpp"
#include "sgkit/cells.hpp"
#include "sgkit/data.hpp"
#include "sgkit/numkit.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace sgkit {

enum class OptimizerKind { adabelief, adam };

auto toString(OptimizerKind kind) -> std::string_view;
auto parseOptimizerKind(std::string_view name) -> std::optional<OptimizerKind>;

struct TrainConfig
{
    double lr { 1e-3 };
    double labelSmoothing { 0.1 };
    double clipNorm { 1.0 };
    double weightDecay { 0.1 };
    std::size_t epochs { 30 };
    std::size_t batchSize { 32 };
    std::uint64_t seed { 0 };
    bool tailAverage { false };
    OptimizerKind optimizer { OptimizerKind::adabelief };
    double beta1 { 0.9 };
    double beta2 { 0.999 };
    double eps { 1e-16 };
    // Soft mode trains the smooth relaxation; it needs unit dsigmoid
    // surrogates on every layer.
    ForwardMode mode { ForwardMode::spiking };

    auto validate() const -> void;
};

struct LossResult
{
    double loss;
    Matrix grad; // dL/dlogits, T x n_classes
};

// Cross-entropy against (1 - ls) onehot + ls / n per step, averaged over
// the steps.
auto smoothedXent(const Matrix& logits, std::size_t target, double labelSmoothing)
  -> LossResult;

struct ModePrediction
{
    bool correct;
    std::size_t predicted;
};

// Per-step argmax (ties to the lowest class), then the class predicted on
// the most steps; ties go to the longest consecutive run, then the lowest
// index.
auto modeAccuracy(const Matrix& logits, std::size_t target) -> ModePrediction;

// Scales grads so that their global norm is at most clipNorm; returns the
// norm before clipping.
auto clipGradients(GradSet& grads, double clipNorm) -> double;

class Optimizer
{
public:
    Optimizer(const Network& net, const TrainConfig& cfg);

    // Clips grads in place, applies decoupled decay and the adaptive step,
    // and re-zeroes recurrent diagonals. Returns the pre-clip norm.
    auto step(Network& net, GradSet& grads) -> double;

    [[nodiscard]] auto steps() const noexcept -> std::size_t { return t_; }

private:
    TrainConfig cfg_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> s_;
    std::size_t t_ {};
};

struct Evaluation
{
    double loss;
    double modeAccuracy;
};

auto evaluate(const Network& net,
              const Dataset& data,
              double labelSmoothing,
              ForwardMode mode = ForwardMode::spiking) -> Evaluation;

struct EpochRecord
{
    std::size_t epoch;
    double trainLoss;
    double valLoss;
    double valModeAcc;
};

using History = std::vector<EpochRecord>;

// Called after each epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochRecord&)>;

auto fit(Network& net,
         const Dataset& train,
         const Dataset& validation,
         const TrainConfig& cfg,
         const EpochCallback& onEpoch = {}) -> History;

// epoch,train_loss,val_loss,val_mode_acc with 17 significant digits.
auto writeHistory(std::ostream& out, const History& history) -> void;

} // namespace sgkit
