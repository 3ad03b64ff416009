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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace sgkit {

struct Event
{
    std::uint32_t t;
    std::uint32_t channel;

    auto operator==(const Event&) const -> bool = default;
};

struct SpikeSequence
{
    std::size_t steps {};
    std::size_t channels {};
    std::vector<Event> events; // sorted by time
    std::size_t label {};

    [[nodiscard]] auto dense() const -> Matrix;

    auto operator==(const SpikeSequence&) const -> bool = default;
};

struct Dataset
{
    std::size_t channels {};
    std::size_t steps {};
    std::vector<SpikeSequence> samples;

    [[nodiscard]] auto classCount() const -> std::size_t;

    auto operator==(const Dataset&) const -> bool = default;
};

struct DatasetStats
{
    double meanZ;
    double varZ;
};

// Mean and population variance over every (step, channel, sample) entry.
auto datasetStats(const Dataset& data) -> DatasetStats;

// Spike time tau * log(x / (x - theta)) for x > theta, none otherwise.
// Intensities outside [0, 1] are clipped; clipped, when given, counts them.
auto latencyEncode(double x, double theta, double tau, std::size_t* clipped = nullptr)
  -> std::optional<double>;

struct LatencyParams
{
    double theta { 0.2 };
    double tau { 50.0 };
    std::size_t steps { 50 };
    double dt { 1.0 };
};

// One channel per pixel; a spike lands in bin floor(T(x) / dt) when that
// bin is inside the window.
auto encodeImage(std::span<const double> pixels,
                 std::size_t label,
                 const LatencyParams& params = {},
                 std::size_t* clipped = nullptr) -> SpikeSequence;

// Synthetic classification: each class owns a vector of per-channel
// Bernoulli rates that is constant over time. A random subset of channels
// is raised to activeRate for every class; the rest fire at baseRate.
struct SynthConfig
{
    std::size_t classes { 4 };
    std::size_t channels { 100 };
    std::size_t steps { 50 };
    double baseRate { 0.25 };
    double activeRate { 0.3 };
    double activeFraction { 0.1 };
};

auto synthTemplates(Rng& rng, const SynthConfig& cfg) -> Matrix;
// Labels cycle through the classes and the samples are then shuffled.
auto synthTask(Rng& rng, const Matrix& templates, std::size_t steps, std::size_t count)
  -> Dataset;
// Maximum-likelihood class under the templates, ties to the lowest index.
auto bayesPredict(const Matrix& templates, const SpikeSequence& seq) -> std::size_t;
// Monte Carlo estimate of the Bayes-optimal accuracy with balanced labels.
auto bayesAccuracy(Rng& rng, const Matrix& templates, std::size_t steps, std::size_t draws)
  -> double;

auto writeEvents(std::ostream& out, const Dataset& data) -> void;
auto readEvents(std::istream& in) -> Dataset;
auto writeEventFile(const std::filesystem::path& path, const Dataset& data) -> void;
auto readEventFile(const std::filesystem::path& path) -> Dataset;

// IDX files as distributed with MNIST: big-endian header, unsigned bytes.
struct IdxImages
{
    std::size_t count {};
    std::size_t rows {};
    std::size_t cols {};
    std::vector<std::uint8_t> pixels;
};

auto readIdxImages(const std::filesystem::path& path) -> IdxImages;
auto readIdxLabels(const std::filesystem::path& path) -> std::vector<std::uint8_t>;

// Encodes the images whose indices are listed, pixels rescaled to [0, 1].
auto encodeIdx(const IdxImages& images,
               std::span<const std::uint8_t> labels,
               std::span<const std::size_t> indices,
               const LatencyParams& params = {}) -> Dataset;

} // namespace sgkit
