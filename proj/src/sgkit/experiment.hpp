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

#include "sgkit/conditions.hpp"
#include "sgkit/config.hpp"
#include "sgkit/data.hpp"
#include "sgkit/train.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sgkit {

struct TaskData
{
    Dataset train;
    Dataset validation;
    std::optional<Matrix> templates; // synthetic tasks only
    std::size_t classes {};
};

auto loadTask(const ExperimentConfig& cfg) -> TaskData;

// Per-layer statistics for the condition solver. The first layer sees the
// data, the others sit on spiking layers.
auto layerStats(const ExperimentConfig& cfg, const DatasetStats& input, std::size_t inputs)
  -> std::vector<LayerStats>;

struct BuiltNetwork
{
    Network net;
    std::vector<ConditionedInit> solved; // conditioned init only
};

// Samples the initial network for a seed. Weight draws come from named
// substreams of Rng(seed), so naive and conditioned networks share W_in.
auto buildNetwork(const ExperimentConfig& cfg,
                  const DatasetStats& input,
                  std::size_t inputs,
                  std::size_t outputs,
                  std::uint64_t seed) -> BuiltNetwork;

// Key=value report of a conditioned (or scheme) initialization.
auto initReport(const ExperimentConfig& cfg, const DatasetStats& input, const BuiltNetwork& built)
  -> std::string;

// Weights as text: a header, then per array `name rows cols` followed by
// one line per row.
auto writeWeights(std::ostream& out, const Network& net) -> void;

struct ProbeRow
{
    std::size_t t;
    std::size_t layer;
    double firingRate;
    double meanV;
    double medianV;
    double varV;
    double recurrentTermVar;
    double inputTermVar;
    double gradVar;
    double gradMax;
};

// Forward statistics pooled over samples and neurons, and gradient
// statistics from a random loss gradient injected at the last step only,
// so that the rows trace how a gradient travels back in time. Gradient
// variances are averaged over samples, maxima taken over samples.
auto probeNetwork(const Network& net, const std::vector<Matrix>& inputs, Rng& rng)
  -> std::vector<ProbeRow>;

auto writeProbe(std::ostream& out, const std::vector<ProbeRow>& rows) -> void;

// Applies one sweep value to a configuration. Axes: dampening, sharpness,
// tail_q, shape, init_scheme. Setting dampening or sharpness removes the
// condition that would otherwise overwrite it.
auto applySweepValue(ExperimentConfig& cfg, std::string_view axis, std::string_view value) -> void;

struct SweepRow
{
    std::string axis;
    std::string value;
    std::uint64_t seed;
    double finalValAcc;
    double finalValLoss;
    bool ok;
    std::string error;
};

auto writeSweep(std::ostream& out, const std::vector<SweepRow>& rows) -> void;

// Command entry points. Reports go to `out`; files go to cfg.outputDir.
// Each returns true on full success; init-solve returns false when a layer
// is infeasible.
auto runInitSolve(const ExperimentConfig& cfg, std::ostream& out) -> bool;
auto runTrain(const ExperimentConfig& cfg, std::ostream& out) -> History;
auto runSweep(const ExperimentConfig& cfg, std::ostream& out, std::size_t threads)
  -> std::vector<SweepRow>;
auto runProbe(const ExperimentConfig& cfg, std::ostream& out) -> std::vector<ProbeRow>;
auto runEncode(const ExperimentConfig& cfg, std::ostream& out) -> void;

} // namespace sgkit
