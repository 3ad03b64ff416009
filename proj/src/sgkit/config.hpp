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

// Experiment configuration as flat `section.key=value` text. Lines starting
// with '#' and blank lines are ignored. Every key has a default, so an
// empty file is a valid configuration.

#include "sgkit/cells.hpp"
#include "sgkit/conditions.hpp"
#include "sgkit/data.hpp"
#include "sgkit/init.hpp"
#include "sgkit/surrogate.hpp"
#include "sgkit/train.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgkit {

enum class TaskKind { synth, slMnist, events };

auto toString(TaskKind kind) -> std::string_view;
auto parseTaskKind(std::string_view name) -> std::optional<TaskKind>;

struct TaskConfig
{
    TaskKind kind { TaskKind::synth };
    std::uint64_t seed { 0 }; // fixes the synthetic task or the image subset
    SynthConfig synth {};
    std::size_t trainSize { 1000 };
    std::size_t valSize { 500 };
    std::string trainPath; // event files
    std::string valPath;
    std::string imagesPath; // IDX files
    std::string labelsPath;
    LatencyParams latency {};

    auto operator==(const TaskConfig&) const -> bool = default;
};

struct ModelConfig
{
    CellKind cell { CellKind::lif };
    std::size_t layers { 2 };
    // One entry per layer, or a single entry shared by all layers.
    std::vector<std::size_t> nRec { 64 };
    std::vector<double> alpha { 0.9 };
    std::vector<double> thr { 1.0 };
    ResetKind reset { ResetKind::subtractive };
    double rho { 0.9 };
    double beta { 0.0 };

    [[nodiscard]] auto widthOf(std::size_t layer) const -> std::size_t;
    [[nodiscard]] auto alphaOf(std::size_t layer) const -> double;
    [[nodiscard]] auto thrOf(std::size_t layer) const -> double;

    auto operator==(const ModelConfig&) const -> bool = default;
};

enum class InitMode { scheme, conditioned };

auto toString(InitMode mode) -> std::string_view;
auto parseInitMode(std::string_view name) -> std::optional<InitMode>;

struct InitConfig
{
    InitMode mode { InitMode::conditioned };
    VarianceRule rule { VarianceRule::glorot };
    WeightDistribution distribution { WeightDistribution::uniform };
    ConditionMask mask { ConditionMask::all() };
    BoundsMode bounds { BoundsMode::perSample };
    WeightDistribution wRecDistribution { WeightDistribution::uniform };

    auto operator==(const InitConfig&) const -> bool = default;
};

struct SweepConfig
{
    std::string axis { "dampening" };
    std::vector<std::string> values { "0.4", "0.8", "1.2" };
    std::size_t seeds { 3 };

    auto operator==(const SweepConfig&) const -> bool = default;
};

struct ProbeConfig
{
    std::size_t steps { 50 };
    std::size_t samples { 16 };

    auto operator==(const ProbeConfig&) const -> bool = default;
};

struct ExperimentConfig
{
    std::uint64_t seed { 0 };
    std::string outputDir { "out" };
    TaskConfig task {};
    ModelConfig model {};
    SurrogateSpec surrogate {};
    InitConfig init {};
    TrainConfig train {};
    SweepConfig sweep {};
    ProbeConfig probe {};

    // Assigns one key. Unknown keys and malformed values are config errors.
    auto set(std::string_view key, std::string_view value) -> void;
    // The current value of a key in its canonical text form.
    [[nodiscard]] auto get(std::string_view key) const -> std::string;
    // Range and consistency checks that do not touch the file system.
    auto validate() const -> void;

    auto operator==(const ExperimentConfig& other) const -> bool;
};

// Every key in canonical order.
auto configKeys() -> const std::vector<std::string>&;

auto parseConfig(std::string_view text) -> ExperimentConfig;
auto loadConfig(const std::filesystem::path& path) -> ExperimentConfig;
// Applies `key=value` overrides in order.
auto applyOverrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) -> void;
// All keys, one per line, in a form parseConfig reads back to an equal
// configuration.
auto echoConfig(const ExperimentConfig& cfg) -> std::string;

} // namespace sgkit
