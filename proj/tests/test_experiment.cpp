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
#include "sgkit/experiment.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using namespace sgkit;
namespace fs = std::filesystem;

auto slurp(const fs::path& path) -> std::string
{
    std::ifstream in { path, std::ios::binary };
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

auto same(const Matrix& a, const Matrix& b) -> bool
{
    return a.rows() == b.rows() && std::ranges::equal(a.values(), b.values());
}

auto countLines(const std::string& text) -> std::size_t
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

auto scratch(const std::string& name) -> fs::path
{
    const auto dir { fs::temp_directory_path() / ("sgkit_test_" + name) };
    fs::remove_all(dir);
    return dir;
}

// A small synthetic run that trains in well under a second.
auto tiny(const std::string& name) -> ExperimentConfig
{
    return parseConfig("task.channels=20\n"
                       "task.steps=12\n"
                       "task.train_size=40\n"
                       "task.val_size=20\n"
                       "model.n_rec=8\n"
                       "train.epochs=2\n"
                       "train.batch_size=8\n"
                       "sweep.seeds=2\n"
                       "probe.steps=12\n"
                       "probe.samples=4\n"
                       "output_dir="
                       + scratch(name).string() + "\n");
}

auto errorKind(auto&& fn) -> ErrorKind
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::state;
}

TEST(InitSolve, EmptyMaskReportsNaiveDefaults)
{
    auto cfg { tiny("naive") };
    cfg.set("init.mask", "none");
    std::ostringstream out;
    EXPECT_TRUE(runInitSolve(cfg, out));
    const auto report { out.str() };
    EXPECT_NE(report.find("layer0.gamma=1\n"), std::string::npos) << report;
    EXPECT_NE(report.find("layer1.sharpness=1\n"), std::string::npos);
    EXPECT_NE(report.find("layer0.mean_w_rec=0\n"), std::string::npos);
    EXPECT_EQ(slurp(fs::path { cfg.outputDir } / "init_solve.txt"), report);

    // Identical to a plain Glorot-uniform draw from the same seed.
    const auto task { loadTask(cfg) };
    const auto stats { datasetStats(task.train) };
    const auto solved { buildNetwork(cfg, stats, task.train.channels, task.classes, cfg.seed) };
    cfg.set("init.mode", "scheme");
    const auto plain { buildNetwork(cfg, stats, task.train.channels, task.classes, cfg.seed) };
    for (std::size_t l {}; l < 2; ++l) {
        EXPECT_TRUE(same(solved.net.layers[l].w.wRec, plain.net.layers[l].w.wRec));
        EXPECT_TRUE(same(solved.net.layers[l].w.wIn, plain.net.layers[l].w.wIn));
    }
}

TEST(InitSolve, FullMaskReportsSolvedValues)
{
    auto cfg { tiny("full") };
    std::ostringstream out;
    runInitSolve(cfg, out);
    const auto task { loadTask(cfg) };
    const auto stats { datasetStats(task.train) };
    const auto built { buildNetwork(cfg, stats, task.train.channels, task.classes, cfg.seed) };
    ASSERT_EQ(built.solved.size(), 2u);
    const auto& s { built.solved[0] };
    // Mean from the first condition.
    const double n { 8.0 };
    EXPECT_NEAR(s.meanWrec, (3.0 - 2.0 * 0.9) * 1.0 / (n - 1.0), 1e-15);
    char line[96];
    std::snprintf(line, sizeof line, "layer0.gamma=%.17g\n", s.gamma);
    EXPECT_NE(out.str().find(line), std::string::npos) << out.str();
    EXPECT_EQ(built.net.layers[0].cfg.surrogate.gamma, s.gamma);
    EXPECT_EQ(built.net.layers[1].cfg.surrogate.sharpness, built.solved[1].sharpness);
}

TEST(InitSolve, AlphaAboveOneIsABoundError)
{
    auto cfg { tiny("alpha") };
    cfg.set("model.alpha", "1.1");
    std::ostringstream out;
    EXPECT_EQ(errorKind([&] { runInitSolve(cfg, out); }), ErrorKind::domain);
}

TEST(InitSolve, ConditionedSlstmIsRejected)
{
    auto cfg { tiny("slstm") };
    cfg.set("model.cell", "slstm");
    std::ostringstream out;
    EXPECT_EQ(errorKind([&] { runInitSolve(cfg, out); }), ErrorKind::usage);
}

TEST(Train, SameSeedGivesIdenticalFiles)
{
    auto a { tiny("train_a") };
    auto b { tiny("train_b") };
    std::ostringstream sink;
    const auto history { runTrain(a, sink) };
    runTrain(b, sink);
    ASSERT_EQ(history.size(), 2u);
    const fs::path da { a.outputDir };
    const fs::path db { b.outputDir };
    EXPECT_EQ(slurp(da / "history.csv"), slurp(db / "history.csv"));
    EXPECT_EQ(slurp(da / "weights.txt"), slurp(db / "weights.txt"));
    EXPECT_EQ(countLines(slurp(da / "history.csv")), 3u);
    // The config echo reloads to the configuration that produced the run.
    EXPECT_EQ(parseConfig(slurp(da / "config.txt")), a);
}

TEST(Train, MissingDatasetIsAnIoError)
{
    auto cfg { tiny("missing") };
    cfg.set("task.kind", "events");
    cfg.set("task.train_path", "/nonexistent/train.events");
    cfg.set("task.val_path", "/nonexistent/val.events");
    std::ostringstream out;
    EXPECT_EQ(errorKind([&] { runTrain(cfg, out); }), ErrorKind::io);
}

TEST(Encode, EventFilesReloadAsTheTask)
{
    auto cfg { tiny("encode") };
    std::ostringstream out;
    runEncode(cfg, out);
    const fs::path dir { cfg.outputDir };
    auto reload { cfg };
    reload.set("task.kind", "events");
    reload.set("task.train_path", (dir / "train.events").string());
    reload.set("task.val_path", (dir / "val.events").string());
    const auto a { loadTask(cfg) };
    const auto b { loadTask(reload) };
    EXPECT_EQ(b.train.samples.size(), 40u);
    EXPECT_EQ(b.validation.samples.size(), 20u);
    EXPECT_EQ(datasetStats(a.train).meanZ, datasetStats(b.train).meanZ);
    for (std::size_t i {}; i < a.train.samples.size(); ++i) {
        EXPECT_EQ(a.train.samples[i].label, b.train.samples[i].label);
        EXPECT_TRUE(same(a.train.samples[i].dense(), b.train.samples[i].dense()));
    }
}

TEST(Probe, RowCountIsStepsTimesLayers)
{
    auto cfg { tiny("probe") };
    cfg.set("model.layers", "3");
    std::ostringstream out;
    const auto rows { runProbe(cfg, out) };
    EXPECT_EQ(rows.size(), 12u * 3u);
    const auto csv { slurp(fs::path { cfg.outputDir } / "probe.csv") };
    EXPECT_EQ(countLines(csv), 12u * 3u + 1u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "t,layer,firing_rate,mean_v,median_v,var_v,recurrent_term_var,input_term_var,"
              "grad_var,grad_max");
    for (const auto& r : rows) {
        EXPECT_GE(r.firingRate, 0.0);
        EXPECT_LE(r.firingRate, 1.0);
        EXPECT_GE(r.gradVar, 0.0);
    }
    EXPECT_EQ(rows.back().t, 11u);
    EXPECT_EQ(rows.back().layer, 2u);
}

TEST(Probe, ZeroWeightsNeverFire)
{
    auto cfg { tiny("zero") };
    cfg.set("init.mode", "scheme");
    const auto task { loadTask(cfg) };
    auto built { buildNetwork(cfg, datasetStats(task.train), task.train.channels, task.classes, 0) };
    for (auto& layer : built.net.layers) {
        std::fill(layer.w.wIn.values().begin(), layer.w.wIn.values().end(), 0.0);
        std::fill(layer.w.wRec.values().begin(), layer.w.wRec.values().end(), 0.0);
    }
    std::vector<Matrix> inputs;
    for (std::size_t i {}; i < 3; ++i) {
        inputs.push_back(task.train.samples[i].dense());
    }
    Rng rng { 1 };
    const auto rows { probeNetwork(built.net, inputs, rng) };
    ASSERT_EQ(rows.size(), 12u * 2u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.firingRate, 0.0);
        EXPECT_EQ(r.varV, 0.0);
        EXPECT_EQ(r.inputTermVar, 0.0);
    }
}

TEST(Sweep, ShapeAxisHasOneRowPerShapeAndSeed)
{
    auto cfg { tiny("shapes") };
    cfg.set("train.epochs", "1");
    cfg.set("init.mode", "scheme");
    cfg.set("sweep.axis", "shape");
    cfg.set("sweep.values",
            "triangular,exponential,gaussian,dsigmoid,dfastsigmoid,rectangular,qpseudospike");
    std::ostringstream out;
    const auto rows { runSweep(cfg, out, 1) };
    ASSERT_EQ(rows.size(), 7u * 2u);
    for (std::size_t i {}; i < rows.size(); ++i) {
        EXPECT_TRUE(rows[i].ok) << rows[i].error;
        EXPECT_EQ(rows[i].seed, i % 2);
    }
    const auto csv { slurp(fs::path { cfg.outputDir } / "sweep.csv") };
    EXPECT_EQ(countLines(csv), 15u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "axis,value,seed,final_val_acc,final_val_loss,status");
}

TEST(Sweep, ThreadCountDoesNotChangeOutput)
{
    auto a { tiny("sweep_a") };
    a.set("sweep.values", "0.4,1.2");
    auto b { a };
    b.outputDir = scratch("sweep_b").string();
    std::ostringstream sink;
    runSweep(a, sink, 1);
    runSweep(b, sink, 3);
    EXPECT_EQ(slurp(fs::path { a.outputDir } / "sweep.csv"),
              slurp(fs::path { b.outputDir } / "sweep.csv"));
    EXPECT_EQ(slurp(fs::path { a.outputDir } / "sweep" / "cell1_seed1.csv"),
              slurp(fs::path { b.outputDir } / "sweep" / "cell1_seed1.csv"));
}

TEST(Sweep, FailedCellIsRecordedAndTheSweepContinues)
{
    auto cfg { tiny("failed") };
    cfg.set("model.cell", "slstm");
    cfg.set("init.mode", "scheme");
    cfg.set("train.epochs", "1");
    cfg.set("sweep.axis", "init_scheme");
    cfg.set("sweep.values", "conditioned,he-normal");
    cfg.set("sweep.seeds", "1");
    std::ostringstream out;
    const auto rows { runSweep(cfg, out, 1) };
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].ok);
    EXPECT_TRUE(std::isnan(rows[0].finalValAcc));
    EXPECT_TRUE(rows[1].ok) << rows[1].error;
    const auto csv { slurp(fs::path { cfg.outputDir } / "sweep.csv") };
    EXPECT_NE(csv.find("init_scheme,conditioned,0,nan,nan,failed\n"), std::string::npos) << csv;
}

TEST(Sweep, AxisValuesMapOntoConfig)
{
    ExperimentConfig cfg;
    auto d { cfg };
    applySweepValue(d, "dampening", "0.4");
    EXPECT_EQ(d.surrogate.gamma, 0.4);
    EXPECT_FALSE(d.init.mask.c3);
    EXPECT_TRUE(d.init.mask.c4);
    auto q { cfg };
    applySweepValue(q, "tail_q", "16.85");
    EXPECT_EQ(q.surrogate.shape, SurrogateShape::qpseudospike);
    EXPECT_EQ(q.surrogate.q, 16.85);
    auto s { cfg };
    applySweepValue(s, "init_scheme", "orthogonal-bigamma");
    EXPECT_EQ(s.init.mode, InitMode::scheme);
    EXPECT_EQ(s.get("init.rule"), "orthogonal");
    EXPECT_EQ(s.get("init.distribution"), "bigamma");
    EXPECT_EQ(errorKind([&] { applySweepValue(s, "width", "3"); }), ErrorKind::config);
    EXPECT_EQ(errorKind([&] { applySweepValue(s, "init_scheme", "bogus"); }), ErrorKind::config);
}

} // namespace
