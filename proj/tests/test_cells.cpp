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

#include "sgkit/cells.hpp"
#include "sgkit/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace {

using namespace sgkit;
using sgkit::testing::binaryInputs;
using sgkit::testing::randomNetwork;

auto singleNeuron(ResetKind reset) -> std::pair<CellConfig, WeightSet>
{
    auto cfg { CellConfig::uniform(CellKind::lif, 1, 1, 0.5, 1.0) };
    cfg.reset = reset;
    WeightSet w { Matrix(1, 1, 2.0), Matrix(1, 1, 0.0), { 0.0 } };
    return { cfg, w };
}

TEST(Lif, SilentNetworkStaysSilent)
{
    const auto cfg { CellConfig::uniform(CellKind::lif, 3, 4, 0.9, 1.0) };
    const auto w { WeightSet::zeros(cfg) };
    auto state { CellState::zeros(cfg) };
    const std::vector<double> z { 1.0, 0.0, 1.0 };
    for (int t {}; t < 10; ++t) {
        state = lifStep(cfg, w, state, z);
        for (std::size_t i {}; i < 4; ++i) {
            EXPECT_EQ(state.y[i], 0.0);
            EXPECT_EQ(state.x[i], 0.0);
        }
    }
}

TEST(Lif, SubtractiveHandTrace)
{
    const auto [cfg, w] = singleNeuron(ResetKind::subtractive);
    auto s { CellState::zeros(cfg) };
    s = lifStep(cfg, w, s, std::vector<double> { 1.0 });
    EXPECT_EQ(s.y[0], 2.0);
    EXPECT_EQ(s.x[0], 1.0);
    s = lifStep(cfg, w, s, std::vector<double> { 0.0 });
    EXPECT_EQ(s.y[0], 0.0);
    EXPECT_EQ(s.x[0], 0.0);
    s = lifStep(cfg, w, s, std::vector<double> { 0.0 });
    EXPECT_EQ(s.y[0], 0.0);
    EXPECT_EQ(s.x[0], 0.0);
}

TEST(Lif, MultiplicativeHandTrace)
{
    const auto [cfg, w] = singleNeuron(ResetKind::multiplicative);
    auto s { CellState::zeros(cfg) };
    s = lifStep(cfg, w, s, std::vector<double> { 1.0 });
    EXPECT_EQ(s.y[0], 1.0);
    EXPECT_EQ(s.x[0], 1.0);
    s = lifStep(cfg, w, s, std::vector<double> { 0.0 });
    EXPECT_EQ(s.y[0], 0.0);
    EXPECT_EQ(s.x[0], 0.0);
}

TEST(Lif, ShapeAndKindErrors)
{
    const auto [cfg, w] = singleNeuron(ResetKind::subtractive);
    const auto s { CellState::zeros(cfg) };
    try {
        (void)lifStep(cfg, w, s, std::vector<double> { 1.0, 2.0 });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::shape);
    }
    EXPECT_THROW((void)alifStep(cfg, w, s, std::vector<double> { 1.0 }), Error);
}

TEST(Lif, NonFiniteStateIsReported)
{
    const auto [cfg, w] = singleNeuron(ResetKind::subtractive);
    auto s { CellState::zeros(cfg) };
    s.y[0] = std::numeric_limits<double>::infinity();
    try {
        (void)lifStep(cfg, w, s, std::vector<double> { 0.0 });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numeric);
    }
}

TEST(Alif, WithoutAdaptationMatchesLifBitExactly)
{
    Rng rng { 3 };
    for (const auto reset : { ResetKind::subtractive, ResetKind::multiplicative }) {
        auto lif { randomNetwork(rng, CellKind::lif, { 6, 10, 7 }, 3, 0.8, reset) };
        auto alif { lif };
        for (auto& layer : alif.layers) {
            layer.cfg.kind = CellKind::alif;
            layer.cfg.beta = 0.0;
            layer.cfg.rho = 0.7;
        }
        const auto inputs { binaryInputs(rng, 30, 6, 0.4) };
        const auto a { stackForward(lif, inputs, true) };
        const auto b { stackForward(alif, inputs, true) };
        EXPECT_EQ(a.outputs, b.outputs);
        for (std::size_t l {}; l < 2; ++l) {
            EXPECT_EQ(a.tape.layers[l].y, b.tape.layers[l].y);
            EXPECT_EQ(a.tape.layers[l].x, b.tape.layers[l].x);
        }
    }
}

TEST(Alif, ThresholdJumpsAfterSpike)
{
    auto cfg { CellConfig::uniform(CellKind::alif, 1, 1, 0.5, 1.0) };
    cfg.rho = 0.0;
    cfg.beta = 1.0;
    const WeightSet w { Matrix(1, 1, 2.0), Matrix(1, 1, 0.0), { 0.0 } };
    Network net { { { cfg, w } }, { Matrix(1, 1, 1.0), { 0.0 } } };
    Matrix inputs(3, 1);
    inputs(0, 0) = 1.0;
    const auto run { stackForward(net, inputs, true) };
    const auto& lt { run.tape.layers[0] };
    ASSERT_EQ(lt.x(0, 0), 1.0);
    EXPECT_EQ(lt.thrEff(0, 0), 1.0);
    EXPECT_EQ(lt.thrEff(1, 0), 2.0);
    EXPECT_EQ(lt.thrEff(2, 0), 1.0 + lt.x(1, 0));
}

TEST(Alif, IntervalsGrowUnderConstantDrive)
{
    auto cfg { CellConfig::uniform(CellKind::alif, 1, 1, 0.8, 1.0) };
    cfg.rho = 0.95;
    cfg.beta = 0.5;
    const WeightSet w { Matrix(1, 1, 0.6), Matrix(1, 1, 0.0), { 0.0 } };
    Network net { { { cfg, w } }, { Matrix(1, 1, 1.0), { 0.0 } } };
    const Matrix inputs(400, 1, 1.0);
    const auto run { stackForward(net, inputs, false) };
    std::vector<std::size_t> spikes;
    for (std::size_t t {}; t < 400 && spikes.size() < 6; ++t) {
        if (run.tape.layers[0].x(t, 0) == 1.0) {
            spikes.push_back(t);
        }
    }
    ASSERT_EQ(spikes.size(), 6u);
    for (std::size_t k { 2 }; k < spikes.size(); ++k) {
        EXPECT_GE(spikes[k] - spikes[k - 1], spikes[k - 1] - spikes[k - 2]);
    }
    EXPECT_GT(spikes[5] - spikes[4], spikes[1] - spikes[0]);
}

TEST(Slstm, NonNegativePreActivationsOpenEveryGate)
{
    auto cfg { CellConfig::uniform(CellKind::slstm, 2, 3, 0.5, 1.0) };
    auto w { WeightSet::zeros(cfg) };
    std::fill(w.b.begin(), w.b.end(), 0.0);
    auto s { CellState::zeros(cfg) };
    const std::vector<double> z { 0.0, 0.0 };
    // Gates are 1 and the candidate is -1, so c counts down by one.
    for (int t { 1 }; t <= 3; ++t) {
        s = slstmStep(cfg, w, s, z);
        for (std::size_t i {}; i < 3; ++i) {
            EXPECT_EQ(s.c[i], -static_cast<double>(t));
            EXPECT_EQ(s.x[i], 1.0);
        }
    }
}

TEST(Slstm, NegativePreActivationsCloseEveryGate)
{
    auto cfg { CellConfig::uniform(CellKind::slstm, 2, 3, 0.5, 1.0) };
    auto w { WeightSet::zeros(cfg) };
    std::fill(w.b.begin(), w.b.end(), -1.0);
    auto s { CellState::zeros(cfg) };
    s.c = { 5.0, -2.0, 0.5 };
    s = slstmStep(cfg, w, s, std::vector<double> { 0.0, 0.0 });
    for (std::size_t i {}; i < 3; ++i) {
        EXPECT_EQ(s.c[i], 0.0);
        EXPECT_EQ(s.x[i], 0.0);
    }
}

TEST(Slstm, HiddenOutputIsTernary)
{
    Rng rng { 8 };
    for (int trial {}; trial < 20; ++trial) {
        const auto net { randomNetwork(rng, CellKind::slstm, { 5, 6, 4 }, 2, 1.0) };
        const auto run { stackForward(net, binaryInputs(rng, 20, 5, 0.5), false) };
        for (const auto& lt : run.tape.layers) {
            for (const double h : lt.x.values()) {
                EXPECT_TRUE(h == -1.0 || h == 0.0 || h == 1.0);
            }
        }
    }
}

TEST(Slstm, DiagonalMaskCoversEveryGateBlock)
{
    Matrix w(3, 12, 1.0);
    maskDiagonal(w);
    EXPECT_TRUE(diagonalIsZero(w));
    std::size_t zeros {};
    for (const double v : w.values()) {
        zeros += v == 0.0 ? 1 : 0;
    }
    EXPECT_EQ(zeros, 12u);
}

TEST(Stack, ZeroWeightsGiveReadoutBias)
{
    auto cfg { CellConfig::uniform(CellKind::lif, 4, 5, 0.9, 1.0) };
    auto cfg2 { CellConfig::uniform(CellKind::lif, 5, 5, 0.9, 1.0) };
    Network net { { { cfg, WeightSet::zeros(cfg) }, { cfg2, WeightSet::zeros(cfg2) } },
                  { Matrix(5, 3, 0.7), { 0.1, -0.2, 0.3 } } };
    Rng rng { 1 };
    const auto run { stackForward(net, binaryInputs(rng, 12, 4, 0.5), false) };
    for (std::size_t t {}; t < 12; ++t) {
        EXPECT_EQ(run.outputs(t, 0), 0.1);
        EXPECT_EQ(run.outputs(t, 1), -0.2);
        EXPECT_EQ(run.outputs(t, 2), 0.3);
    }
}

TEST(Stack, SingleNeuronReadoutScalesSpikeTrain)
{
    const auto [cfg, w] = singleNeuron(ResetKind::subtractive);
    Network net { { { cfg, w } }, { Matrix(1, 1, 3.0), { 0.0 } } };
    Matrix inputs(4, 1);
    inputs(0, 0) = 1.0;
    const auto run { stackForward(net, inputs, false) };
    EXPECT_EQ(run.outputs(0, 0), 3.0);
    EXPECT_EQ(run.outputs(1, 0), 0.0);
    EXPECT_EQ(run.outputs(2, 0), 0.0);
    EXPECT_EQ(run.outputs(3, 0), 0.0);
}

TEST(Stack, UpperLayerSeesSameStepSpikes)
{
    Rng rng { 4 };
    const auto net { randomNetwork(rng, CellKind::lif, { 5, 8, 6 }, 2, 1.0) };
    const auto run { stackForward(net, binaryInputs(rng, 25, 5, 0.5), true) };
    EXPECT_EQ(run.tape.layers[1].z, run.tape.layers[0].x);
    double spikes {};
    for (const double v : run.tape.layers[0].x.values()) {
        spikes += v;
    }
    EXPECT_GT(spikes, 0.0);

    // Recompute the first upper-layer voltage from the lower layer's spikes
    // at the same step.
    const auto& upper { net.layers[1] };
    for (std::size_t i {}; i < 6; ++i) {
        double y { upper.w.b[i] };
        for (std::size_t j {}; j < 8; ++j) {
            y += run.tape.layers[0].x(0, j) * upper.w.wIn(j, i);
        }
        EXPECT_NEAR(run.tape.layers[1].y(0, i), y, 1e-12);
    }
}

TEST(Stack, WidthMismatchIsShapeError)
{
    Rng rng { 5 };
    auto net { randomNetwork(rng, CellKind::lif, { 5, 8, 6 }, 2, 1.0) };
    try {
        (void)stackForward(net, Matrix(3, 4), false);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::shape);
    }
    net.layers[1].cfg.nIn = 7;
    EXPECT_THROW((void)stackForward(net, Matrix(3, 5), false), Error);
}

TEST(Stack, NonZeroDiagonalRejected)
{
    Rng rng { 6 };
    auto net { randomNetwork(rng, CellKind::lif, { 3, 4 }, 2, 1.0) };
    net.layers[0].w.wRec(1, 1) = 0.5;
    EXPECT_THROW((void)stackForward(net, Matrix(3, 3), false), Error);
}

TEST(Properties, SpikesAreBinaryAcrossRandomConfigs)
{
    Rng rng { 7 };
    for (int trial {}; trial < 1000; ++trial) {
        const auto kind { trial % 2 == 0 ? CellKind::lif : CellKind::alif };
        const auto reset { trial % 3 == 0 ? ResetKind::multiplicative : ResetKind::subtractive };
        const auto net { randomNetwork(rng, kind, { 3, 4, 3 }, 2, 0.2 + 2.0 * rng.uniform01(),
                                       reset) };
        const auto run { stackForward(net, binaryInputs(rng, 15, 3, rng.uniform01()), false) };
        for (const auto& lt : run.tape.layers) {
            for (const double x : lt.x.values()) {
                ASSERT_TRUE(x == 0.0 || x == 1.0);
            }
        }
    }
}

TEST(Properties, SubtractiveVoltageStaysWithinPerNeuronBounds)
{
    Rng rng { 9 };
    for (int trial {}; trial < 100; ++trial) {
        auto net { randomNetwork(rng, CellKind::lif, { 6, 9 }, 2, 1.0) };
        auto& layer { net.layers[0] };
        std::fill(layer.w.b.begin(), layer.w.b.end(), 0.0);
        const auto run { stackForward(net, binaryInputs(rng, 60, 6, 0.5), false) };
        for (std::size_t i {}; i < 9; ++i) {
            double up {};
            double down {};
            for (std::size_t j {}; j < 9; ++j) {
                up += std::max(layer.w.wRec(j, i), 0.0);
                down += std::max(-layer.w.wRec(j, i), 0.0);
            }
            for (std::size_t j {}; j < 6; ++j) {
                up += std::max(layer.w.wIn(j, i), 0.0);
                down += std::max(-layer.w.wIn(j, i), 0.0);
            }
            const double a { layer.cfg.alpha[i] };
            const double yMax { up / (1.0 - a) };
            const double yMin { -(down + layer.cfg.thr[i]) / (1.0 - a) };
            for (std::size_t t {}; t < 60; ++t) {
                EXPECT_LE(run.tape.layers[0].y(t, i), yMax + 1e-12);
                EXPECT_GE(run.tape.layers[0].y(t, i), yMin - 1e-12);
            }
        }
    }
}

TEST(Properties, TimeAveragedSpikeVarianceIsCapped)
{
    Rng rng { 10 };
    for (int trial {}; trial < 50; ++trial) {
        const auto net { randomNetwork(rng, CellKind::lif, { 4, 10 }, 2, 1.5) };
        const auto run { stackForward(net, binaryInputs(rng, 80, 4, 0.5), false) };
        const auto& x { run.tape.layers[0].x };
        for (std::size_t i {}; i < 10; ++i) {
            std::vector<double> train(80);
            for (std::size_t t {}; t < 80; ++t) {
                train[t] = x(t, i);
            }
            EXPECT_LE(stats(train).variance, 0.25 + 1e-12);
        }
    }
}

TEST(Config, Validation)
{
    auto cfg { CellConfig::uniform(CellKind::lif, 2, 3, 0.9, 1.0) };
    EXPECT_NO_THROW(cfg.validate());
    cfg.alpha[1] = 1.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = CellConfig::uniform(CellKind::lif, 2, 3, 0.9, 0.0);
    EXPECT_THROW(cfg.validate(), Error);
    cfg = CellConfig::uniform(CellKind::lif, 2, 3, 0.9, 1.0);
    cfg.thr.pop_back();
    EXPECT_THROW(cfg.validate(), Error);
    EXPECT_EQ(parseCellKind("alif"), CellKind::alif);
    EXPECT_EQ(parseResetKind("multiplicative"), ResetKind::multiplicative);
    EXPECT_FALSE(parseCellKind("gru").has_value());
}

} // namespace
