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

// Discrete-time spiking cells. Weights follow the row-vector convention:
// a presynaptic activity row v drives the postsynaptic layer through v * W,
// so W_in is n_in x n_rec and W_rec is n_rec x n_rec.

#include "sgkit/numkit.hpp"
#include "sgkit/surrogate.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sgkit {

enum class CellKind { lif, alif, slstm };
enum class ResetKind { subtractive, multiplicative };

auto toString(CellKind kind) -> std::string_view;
auto toString(ResetKind kind) -> std::string_view;
auto parseCellKind(std::string_view name) -> std::optional<CellKind>;
auto parseResetKind(std::string_view name) -> std::optional<ResetKind>;

struct CellConfig
{
    std::size_t nIn {};
    std::size_t nRec {};
    std::vector<double> alpha; // per-neuron decay in (0, 1)
    std::vector<double> thr;   // per-neuron threshold > 0
    ResetKind reset { ResetKind::subtractive };
    SurrogateSpec surrogate {};
    CellKind kind { CellKind::lif };
    double rho { 0.9 };  // ALIF adaptation decay
    double beta { 0.0 }; // ALIF threshold increment per unit adaptation

    static auto uniform(CellKind kind,
                        std::size_t nIn,
                        std::size_t nRec,
                        double alpha,
                        double thr) -> CellConfig;

    // Number of recurrent pre-activation columns: 4 n_rec for sLSTM gates
    // (input, forget, output, candidate), n_rec otherwise.
    [[nodiscard]] auto width() const -> std::size_t;
    auto validate() const -> void;
};

struct CellState
{
    std::vector<double> y; // membrane voltage
    std::vector<double> x; // spikes; the hidden output h for sLSTM
    std::vector<double> a; // ALIF adaptation
    std::vector<double> c; // sLSTM cell

    static auto zeros(const CellConfig& cfg) -> CellState;
};

struct WeightSet
{
    Matrix wIn;  // n_in x width
    Matrix wRec; // n_rec x width, zero diagonal (per gate block)
    std::vector<double> b;

    static auto zeros(const CellConfig& cfg) -> WeightSet;
};

// Zero W(i, g * n + i) for every gate block g; a square matrix has one block.
auto maskDiagonal(Matrix& wRec) -> void;
auto diagonalIsZero(const Matrix& wRec) -> bool;

// Spiking uses the Heaviside step. Soft replaces it by sigmoid(4v), whose
// derivative is the dsigmoid surrogate with unit dampening and sharpness,
// which makes the whole network differentiable for gradient checks.
enum class ForwardMode { spiking, soft };

auto lifStep(const CellConfig& cfg,
             const WeightSet& w,
             const CellState& state,
             std::span<const double> z,
             ForwardMode mode = ForwardMode::spiking) -> CellState;
auto alifStep(const CellConfig& cfg,
              const WeightSet& w,
              const CellState& state,
              std::span<const double> z,
              ForwardMode mode = ForwardMode::spiking) -> CellState;
auto slstmStep(const CellConfig& cfg,
               const WeightSet& w,
               const CellState& state,
               std::span<const double> z,
               ForwardMode mode = ForwardMode::spiking) -> CellState;
// Dispatches on cfg.kind.
auto cellStep(const CellConfig& cfg,
              const WeightSet& w,
              const CellState& state,
              std::span<const double> z,
              ForwardMode mode = ForwardMode::spiking) -> CellState;

struct Layer
{
    CellConfig cfg;
    WeightSet w;
};

struct Readout
{
    Matrix w; // n_top x n_out
    std::vector<double> b;
};

struct Network
{
    std::vector<Layer> layers;
    Readout readout;

    [[nodiscard]] auto inputWidth() const -> std::size_t;
    [[nodiscard]] auto outputWidth() const -> std::size_t;
    auto validate() const -> void;
};

// Per-layer forward record, T rows each. Quantities not used by a cell
// kind stay empty.
struct LayerTape
{
    Matrix z;      // layer input
    Matrix y;      // voltage after the update (LIF/ALIF)
    Matrix x;      // layer output: spikes, or h for sLSTM
    Matrix thrEff; // firing threshold in force at each step (ALIF)
    Matrix u;      // y_{t-1} + i_t (multiplicative reset)
    Matrix pre;    // gate pre-activations, T x 4n (sLSTM)
    Matrix c;      // cell state (sLSTM)
};

struct TapeRecord
{
    std::size_t steps {};
    ForwardMode mode { ForwardMode::spiking };
    std::vector<LayerTape> layers;
    bool complete { false };
};

struct ForwardResult
{
    Matrix outputs; // T x n_out readout values
    TapeRecord tape;
};

// Runs the stack from zero state. Layer l > 0 receives the outputs of
// layer l - 1 from the same step. Without record only the layer outputs
// and voltages are kept in the tape.
auto stackForward(const Network& net,
                  const Matrix& inputs,
                  bool record,
                  ForwardMode mode = ForwardMode::spiking) -> ForwardResult;

} // namespace sgkit
