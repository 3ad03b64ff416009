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

#include "sgkit/error.hpp"
#include "sgkit/train.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace {

using namespace sgkit;
using sgkit::testing::randomNetwork;

// One-hot logits that make the given classes the per-step argmax.
auto stepPredictions(const std::vector<std::size_t>& preds, std::size_t classes) -> Matrix
{
    Matrix m(preds.size(), classes, 0.0);
    for (std::size_t t {}; t < preds.size(); ++t) {
        m(t, preds[t]) = 1.0;
    }
    return m;
}

TEST(SmoothedXent, UniformLogitsGiveLogClasses)
{
    const Matrix logits(7, 5, 0.3);
    EXPECT_NEAR(smoothedXent(logits, 2, 0.0).loss, std::log(5.0), 1e-14);
    EXPECT_NEAR(smoothedXent(logits, 2, 0.1).loss, std::log(5.0), 1e-14);
}

TEST(SmoothedXent, SaturatedLogitsApproachSmoothingFloor)
{
    const double big { 200.0 };
    const auto logits { Matrix::fromRows({ { big, -big }, { big, -big } }) };
    const auto r { smoothedXent(logits, 0, 0.1) };
    EXPECT_TRUE(std::isfinite(r.loss));
    EXPECT_NEAR(r.loss / (0.05 * 2.0 * big), 1.0, 1e-12);
    EXPECT_NE(r.grad(0, 0), 0.0);
    EXPECT_NEAR(r.grad(0, 0), 0.05 / 2.0, 1e-12);
}

TEST(SmoothedXent, GradientMatchesFiniteDifferences)
{
    Rng rng { 3 };
    const auto logits { sgkit::testing::randomMatrix(rng, 6, 4, 2.0) };
    const auto r { smoothedXent(logits, 1, 0.1) };
    const double eps { 1e-6 };
    for (std::size_t t {}; t < 6; ++t) {
        for (std::size_t k {}; k < 4; ++k) {
            auto up { logits };
            auto down { logits };
            up(t, k) += eps;
            down(t, k) -= eps;
            const double fd { (smoothedXent(up, 1, 0.1).loss - smoothedXent(down, 1, 0.1).loss)
                              / (2.0 * eps) };
            EXPECT_NEAR(r.grad(t, k), fd, 1e-6);
        }
    }
}

TEST(SmoothedXent, PermutingClassesPermutesGradients)
{
    Rng rng { 4 };
    const auto logits { sgkit::testing::randomMatrix(rng, 5, 4, 1.0) };
    const std::size_t perm[] { 2, 0, 3, 1 };
    Matrix permuted(5, 4);
    for (std::size_t t {}; t < 5; ++t) {
        for (std::size_t k {}; k < 4; ++k) {
            permuted(t, perm[k]) = logits(t, k);
        }
    }
    const auto a { smoothedXent(logits, 3, 0.1) };
    const auto b { smoothedXent(permuted, perm[3], 0.1) };
    EXPECT_NEAR(a.loss, b.loss, 1e-14);
    for (std::size_t t {}; t < 5; ++t) {
        for (std::size_t k {}; k < 4; ++k) {
            EXPECT_NEAR(a.grad(t, k), b.grad(t, perm[k]), 1e-15);
        }
    }
}

TEST(SmoothedXent, Errors)
{
    EXPECT_THROW(smoothedXent(Matrix(3, 1, 0.0), 0, 0.1), Error);
    auto bad { Matrix(2, 3, 0.0) };
    bad(1, 1) = std::nan("");
    try {
        smoothedXent(bad, 0, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numeric);
    }
    EXPECT_THROW(smoothedXent(Matrix(2, 3, 0.0), 3, 0.1), Error);
}

TEST(ModeAccuracy, WorkedExamples)
{
    const auto a { modeAccuracy(stepPredictions({ 0, 0, 1, 1, 1 }, 2), 1) };
    EXPECT_EQ(a.predicted, 1u);
    EXPECT_TRUE(a.correct);
    EXPECT_EQ(modeAccuracy(stepPredictions({ 0, 0, 1, 1 }, 2), 1).predicted, 0u);
    EXPECT_EQ(modeAccuracy(stepPredictions({ 1, 0, 1, 0, 1 }, 2), 0).predicted, 1u);
    EXPECT_FALSE(modeAccuracy(stepPredictions({ 1, 0, 1, 0, 1 }, 2), 0).correct);
    // Equal counts, longer run wins.
    EXPECT_EQ(modeAccuracy(stepPredictions({ 0, 1, 1, 0, 2, 2 }, 3), 0).predicted, 1u);
    // Tied logits go to the lowest class at each step.
    EXPECT_EQ(modeAccuracy(Matrix(4, 3, 0.5), 0).predicted, 0u);
}

TEST(ModeAccuracy, PermutationEquivariance)
{
    Rng rng { 10 };
    for (int trial {}; trial < 200; ++trial) {
        const std::size_t classes { 4 };
        const std::size_t steps { 1 + rng.next() % 12 };
        std::vector<std::size_t> preds(steps);
        for (auto& p : preds) {
            p = rng.next() % classes;
        }
        // Distinct logits per step so the argmax is unambiguous.
        Matrix logits(steps, classes);
        for (std::size_t t {}; t < steps; ++t) {
            for (std::size_t k {}; k < classes; ++k) {
                logits(t, k) = rng.uniform01();
            }
            logits(t, preds[t]) = 2.0;
        }
        std::vector<std::size_t> perm(classes);
        std::iota(perm.begin(), perm.end(), std::size_t { 0 });
        for (std::size_t i { classes }; i > 1; --i) {
            std::swap(perm[i - 1], perm[rng.next() % i]);
        }
        Matrix permuted(steps, classes);
        for (std::size_t t {}; t < steps; ++t) {
            for (std::size_t k {}; k < classes; ++k) {
                permuted(t, perm[k]) = logits(t, k);
            }
        }
        const auto base { modeAccuracy(logits, 0) };
        const auto moved { modeAccuracy(permuted, 0) };
        // Only the final lowest-index rule depends on the labelling; check
        // equivariance when counts or runs decide.
        std::vector<std::size_t> count(classes, 0);
        for (const auto p : preds) {
            ++count[p];
        }
        const auto top { *std::max_element(count.begin(), count.end()) };
        if (std::count(count.begin(), count.end(), top) == 1) {
            EXPECT_EQ(moved.predicted, perm[base.predicted]);
        }
    }
}

auto tinyNetwork(std::uint64_t seed) -> Network
{
    Rng rng { seed };
    return randomNetwork(rng, CellKind::lif, { 3, 4 }, 2, 0.5);
}

auto constantGrads(const Network& net, double value) -> GradSet
{
    auto g { GradSet::zerosLike(net) };
    for (auto& view : gradientViews(g)) {
        std::fill(view.values.begin(), view.values.end(), value);
    }
    for (auto& l : g.layers) {
        maskDiagonal(l.wRec);
    }
    return g;
}

TEST(Optimizer, ZeroGradientsWithoutDecayLeaveWeights)
{
    for (const auto kind : { OptimizerKind::adabelief, OptimizerKind::adam }) {
        auto net { tinyNetwork(1) };
        const auto before { net };
        TrainConfig cfg;
        cfg.optimizer = kind;
        cfg.weightDecay = 0.0;
        Optimizer opt { net, cfg };
        auto g { constantGrads(net, 0.0) };
        opt.step(net, g);
        EXPECT_EQ(net.layers[0].w.wIn, before.layers[0].w.wIn);
        EXPECT_EQ(net.readout.w, before.readout.w);
    }
}

TEST(Optimizer, ZeroGradientsApplyPureDecay)
{
    for (const auto kind : { OptimizerKind::adabelief, OptimizerKind::adam }) {
        auto net { tinyNetwork(2) };
        auto before { net };
        TrainConfig cfg;
        cfg.optimizer = kind;
        Optimizer opt { net, cfg };
        auto g { constantGrads(net, 0.0) };
        opt.step(net, g);
        const auto after { parameterViews(net) };
        const auto orig { parameterViews(before) };
        for (std::size_t k {}; k < after.size(); ++k) {
            for (std::size_t i {}; i < after[k].values.size(); ++i) {
                EXPECT_NEAR(after[k].values[i], orig[k].values[i] * (1.0 - 1e-4), 1e-17)
                  << after[k].name;
            }
        }
    }
}

TEST(Optimizer, ClipsToGlobalNorm)
{
    auto net { tinyNetwork(3) };
    auto g { constantGrads(net, 5.0) };
    const double norm { clipGradients(g, 1.0) };
    EXPECT_GT(norm, 1.0);
    EXPECT_LE(std::sqrt(g.squaredNorm()), 1.0 + 1e-9);
    auto small { constantGrads(net, 1e-4) };
    const double before { small.squaredNorm() };
    clipGradients(small, 1.0);
    EXPECT_EQ(small.squaredNorm(), before);
}

TEST(Optimizer, ConstantGradientStepStabilizes)
{
    for (const auto kind : { OptimizerKind::adabelief, OptimizerKind::adam }) {
        auto net { tinyNetwork(4) };
        TrainConfig cfg;
        cfg.optimizer = kind;
        cfg.weightDecay = 0.0;
        cfg.clipNorm = 1e9;
        Optimizer opt { net, cfg };
        double last {};
        double step {};
        for (int t {}; t < 30000; ++t) {
            const double w { net.readout.w(0, 0) };
            auto g { constantGrads(net, 0.01) };
            opt.step(net, g);
            last = step;
            step = w - net.readout.w(0, 0);
        }
        EXPECT_GT(step, 0.0);
        EXPECT_NEAR(step / last, 1.0, 1e-6) << toString(kind);
        if (kind == OptimizerKind::adam) {
            EXPECT_NEAR(step, cfg.lr, 1e-6);
        }
        EXPECT_TRUE(diagonalIsZero(net.layers[0].w.wRec));
    }
}

TEST(TrainConfig, Validation)
{
    TrainConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    auto bad { cfg };
    bad.lr = 0.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = cfg;
    bad.labelSmoothing = 1.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = cfg;
    bad.clipNorm = 0.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = cfg;
    bad.batchSize = 0;
    EXPECT_THROW(bad.validate(), Error);
}

// Two separable classes: class k drives channels 2k and 2k + 1.
auto toyTask(Rng& rng, std::size_t count) -> Dataset
{
    Matrix templates(2, 4, 0.05);
    templates(0, 0) = templates(0, 1) = 0.8;
    templates(1, 2) = templates(1, 3) = 0.8;
    return synthTask(rng, templates, 6, count);
}

auto softNetwork(std::uint64_t seed) -> Network
{
    Rng rng { seed };
    return randomNetwork(rng, CellKind::lif, { 4, 6 }, 2, 0.3, ResetKind::subtractive,
                         { SurrogateShape::dsigmoid });
}

TEST(Fit, ZeroEpochsKeepsWeights)
{
    Rng rng { 5 };
    const auto data { toyTask(rng, 8) };
    auto net { softNetwork(6) };
    const auto before { net };
    TrainConfig cfg;
    cfg.epochs = 0;
    EXPECT_TRUE(fit(net, data, data, cfg).empty());
    EXPECT_EQ(net.layers[0].w.wRec, before.layers[0].w.wRec);
}

TEST(Fit, SoftToyTaskLossHalves)
{
    Rng rng { 7 };
    const auto train { toyTask(rng, 32) };
    const auto val { toyTask(rng, 16) };
    auto net { softNetwork(8) };
    TrainConfig cfg;
    cfg.mode = ForwardMode::soft;
    cfg.labelSmoothing = 0.0;
    cfg.weightDecay = 0.0;
    cfg.lr = 0.05;
    cfg.batchSize = 8;
    cfg.epochs = 50;
    const double initial { evaluate(net, train, 0.0, ForwardMode::soft).loss };
    const auto history { fit(net, train, val, cfg) };
    ASSERT_EQ(history.size(), 50u);
    EXPECT_LT(history.back().trainLoss, 0.5 * initial);
    EXPECT_TRUE(diagonalIsZero(net.layers[0].w.wRec));
    EXPECT_GT(history.back().valModeAcc, 0.9);
}

TEST(Fit, SameSeedGivesIdenticalHistory)
{
    Rng rng { 9 };
    const auto train { toyTask(rng, 20) };
    const auto val { toyTask(rng, 10) };
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batchSize = 6;
    cfg.seed = 42;
    cfg.tailAverage = true;
    auto a { softNetwork(10) };
    auto b { softNetwork(10) };
    const auto ha { fit(a, train, val, cfg) };
    const auto hb { fit(b, train, val, cfg) };
    std::ostringstream sa;
    std::ostringstream sb;
    writeHistory(sa, ha);
    writeHistory(sb, hb);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(a.readout.w, b.readout.w);
    EXPECT_TRUE(diagonalIsZero(a.layers[0].w.wRec));
}

TEST(Fit, TailAverageChangesOnlyTheTail)
{
    Rng rng { 11 };
    const auto train { toyTask(rng, 20) };
    const auto val { toyTask(rng, 10) };
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.batchSize = 5;
    auto a { softNetwork(12) };
    auto b { softNetwork(12) };
    const auto plain { fit(a, train, val, cfg) };
    cfg.tailAverage = true;
    const auto averaged { fit(b, train, val, cfg) };
    for (std::size_t e {}; e < 8; ++e) {
        EXPECT_EQ(plain[e].trainLoss, averaged[e].trainLoss);
        if (e < 6) {
            EXPECT_EQ(plain[e].valLoss, averaged[e].valLoss);
        }
    }
    EXPECT_EQ(plain[6].valLoss, averaged[6].valLoss);
    EXPECT_NE(a.readout.w, b.readout.w);
}

TEST(History, CsvLayout)
{
    const History h { { 1, 0.5, 0.25, 1.0 / 3.0 } };
    std::ostringstream out;
    writeHistory(out, h);
    EXPECT_EQ(out.str(), "epoch,train_loss,val_loss,val_mode_acc\n"
                         "1,0.5,0.25,0.33333333333333331\n");
}

} // namespace
