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

#include "sgkit/cells.hpp"
#include "sgkit/numkit.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sgkit {

struct LayerGrad
{
    Matrix wIn;
    Matrix wRec; // diagonal always zero
    std::vector<double> b;
};

struct GradSet
{
    std::vector<LayerGrad> layers;
    Matrix readoutW;
    std::vector<double> readoutB;

    static auto zerosLike(const Network& net) -> GradSet;

    auto add(const GradSet& other) -> void;
    auto scale(double factor) -> void;
    [[nodiscard]] auto squaredNorm() const -> double;
    [[nodiscard]] auto finite() const -> bool;
};

// Flat views over every trainable array, in a fixed order shared by the
// network and its gradient so that optimizers can walk them in lockstep.
struct ParamView
{
    std::string name;
    std::span<double> values;
};

auto parameterViews(Network& net) -> std::vector<ParamView>;
auto gradientViews(GradSet& grads) -> std::vector<ParamView>;

// Reverse sweep over a recorded forward pass. lossGrad holds dL/d(readout
// output) per step (T x n_out). Every Heaviside derivative is replaced by
// the layer's surrogate pseudo-derivative, including the one hidden in the
// reset term; gradients reach lower layers through their spikes and stop
// at the data.
auto backward(const Network& net, const TapeRecord& tape, const Matrix& lossGrad)
  -> GradSet;

// Element-wise statistics of dL/dy at one (step, layer). For sLSTM the cell
// state c plays the part of the voltage.
struct GradStat
{
    double variance; // population variance over neurons
    double max;      // largest magnitude over neurons
};

// stats[l][t] for every layer and step.
struct GradProbe
{
    std::vector<std::vector<GradStat>> stats;
    GradSet grads;
};

auto gradProbe(const Network& net, const TapeRecord& tape, const Matrix& lossGrad)
  -> GradProbe;

struct SoftResult
{
    double loss;
    Matrix outputs;
    GradSet grads;
};

// Forward in soft mode, smoothed cross-entropy against target, then the
// same reverse sweep. Requires every layer to carry the dsigmoid surrogate
// with unit dampening and sharpness, in which case the result is the exact
// gradient of a smooth function.
auto softForwardBackward(const Network& net,
                         const Matrix& inputs,
                         std::size_t target,
                         double labelSmoothing) -> SoftResult;

} // namespace sgkit
