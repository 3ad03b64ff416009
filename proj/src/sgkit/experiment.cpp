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

#include "sgkit/experiment.hpp"

#include "sgkit/bptt.hpp"
#include "sgkit/error.hpp"
#include "sgkit/init.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace sgkit {

namespace {

auto num(double v) -> std::string
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

auto ensureDir(const std::string& dir) -> std::filesystem::path
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error { ErrorKind::io, "cannot create output directory " + dir + ": " + ec.message() };
    }
    return dir;
}

auto openOut(const std::filesystem::path& path) -> std::ofstream
{
    std::ofstream out { path, std::ios::binary };
    if (!out) {
        throw Error { ErrorKind::io, "cannot write " + path.string() };
    }
    return out;
}

auto requireFile(const std::string& path, const char* key) -> void
{
    if (path.empty()) {
        throw Error { ErrorKind::config, std::string { "config: " } + key + " is not set" };
    }
    if (!std::filesystem::exists(path)) {
        throw Error { ErrorKind::io, std::string { key } + ": no such file " + path };
    }
}

} // namespace

auto loadTask(const ExperimentConfig& cfg) -> TaskData
{
    TaskData task;
    const Rng root { Rng { cfg.task.seed }.substream("task") };
    switch (cfg.task.kind) {
    case TaskKind::synth: {
        auto tplRng { root.substream("templates") };
        auto trainRng { root.substream("train") };
        auto valRng { root.substream("validation") };
        task.templates = synthTemplates(tplRng, cfg.task.synth);
        task.train = synthTask(trainRng, *task.templates, cfg.task.synth.steps, cfg.task.trainSize);
        task.validation
          = synthTask(valRng, *task.templates, cfg.task.synth.steps, cfg.task.valSize);
        task.classes = cfg.task.synth.classes;
        break;
    }
    case TaskKind::slMnist: {
        requireFile(cfg.task.imagesPath, "task.images_path");
        requireFile(cfg.task.labelsPath, "task.labels_path");
        const auto images { readIdxImages(cfg.task.imagesPath) };
        const auto labels { readIdxLabels(cfg.task.labelsPath) };
        if (labels.size() != images.count) {
            throw Error { ErrorKind::format, "IDX image and label counts differ" };
        }
        const std::size_t want { cfg.task.trainSize + cfg.task.valSize };
        if (want > images.count) {
            throw Error { ErrorKind::config, "task: train_size + val_size exceeds the image count" };
        }
        // Uniform subset without replacement, then split.
        std::vector<std::size_t> order(images.count);
        for (std::size_t i {}; i < order.size(); ++i) {
            order[i] = i;
        }
        auto pick { root.substream("subset") };
        for (std::size_t i {}; i < want; ++i) {
            std::swap(order[i], order[i + pick.next() % (order.size() - i)]);
        }
        const std::span<const std::size_t> all { order.data(), want };
        task.train = encodeIdx(images, labels, all.first(cfg.task.trainSize), cfg.task.latency);
        task.validation = encodeIdx(images, labels, all.subspan(cfg.task.trainSize),
                                    cfg.task.latency);
        break;
    }
    case TaskKind::events:
        requireFile(cfg.task.trainPath, "task.train_path");
        requireFile(cfg.task.valPath, "task.val_path");
        task.train = readEventFile(cfg.task.trainPath);
        task.validation = readEventFile(cfg.task.valPath);
        if (task.train.channels != task.validation.channels) {
            throw Error { ErrorKind::format, "train and validation channel counts differ" };
        }
        break;
    }
    if (task.classes == 0) {
        task.classes = std::max(task.train.classCount(), task.validation.classCount());
    }
    if (task.train.samples.empty() || task.validation.samples.empty()) {
        throw Error { ErrorKind::config, "task: empty train or validation set" };
    }
    if (task.classes < 2) {
        throw Error { ErrorKind::config, "task: needs at least two classes" };
    }
    return task;
}

auto layerStats(const ExperimentConfig& cfg, const DatasetStats& input, std::size_t inputs)
  -> std::vector<LayerStats>
{
    std::vector<LayerStats> out;
    std::size_t nIn { inputs };
    for (std::size_t l {}; l < cfg.model.layers; ++l) {
        LayerStats s;
        s.meanZ = input.meanZ;
        s.varZ = input.varZ;
        s.nIn = nIn;
        s.nRec = cfg.model.widthOf(l);
        s.alpha = cfg.model.alphaOf(l);
        s.thr = cfg.model.thrOf(l);
        s.dataInput = l == 0;
        out.push_back(s);
        nIn = s.nRec;
    }
    return out;
}

auto buildNetwork(const ExperimentConfig& cfg,
                  const DatasetStats& input,
                  std::size_t inputs,
                  std::size_t outputs,
                  std::uint64_t seed) -> BuiltNetwork
{
    cfg.validate();
    BuiltNetwork built;
    const Rng root { Rng { seed }.substream("init") };

    if (cfg.init.mode == InitMode::conditioned) {
        if (cfg.model.cell == CellKind::slstm) {
            throw Error { ErrorKind::usage,
                          "conditioned initialization is defined for LIF and ALIF cells only; "
                          "use init.mode=scheme for sLSTM" };
        }
        SolveOptions opts;
        opts.mask = cfg.init.mask;
        opts.reset = cfg.model.reset;
        opts.shape = cfg.surrogate;
        opts.wRecDistribution = cfg.init.wRecDistribution;
        opts.wInScheme = { cfg.init.rule, cfg.init.distribution };
        opts.bounds = cfg.init.bounds;
        opts.defaultGamma = cfg.surrogate.gamma;
        opts.defaultSharpness = cfg.surrogate.sharpness;
        auto rng { root };
        built.solved = solveAll(layerStats(cfg, input, inputs), opts, rng);
    }

    std::size_t nIn { inputs };
    for (std::size_t l {}; l < cfg.model.layers; ++l) {
        auto cell { CellConfig::uniform(cfg.model.cell, nIn, cfg.model.widthOf(l),
                                        cfg.model.alphaOf(l), cfg.model.thrOf(l)) };
        cell.reset = cfg.model.reset;
        cell.surrogate = cfg.surrogate;
        cell.rho = cfg.model.rho;
        cell.beta = cfg.model.beta;
        WeightSet w;
        if (cfg.init.mode == InitMode::conditioned) {
            const auto& solved { built.solved[l] };
            w = solved.weights;
            cell.surrogate.gamma = solved.gamma;
            cell.surrogate.sharpness = solved.sharpness;
        } else {
            const auto layerRng { root.substream("layer").substream(l) };
            auto inRng { layerRng.substream("w_in") };
            auto recRng { layerRng.substream("w_rec") };
            const InitScheme inScheme { cfg.init.rule, cfg.init.distribution, nIn, cell.nRec };
            const InitScheme recScheme { cfg.init.rule, cfg.init.distribution, cell.nRec,
                                         cell.nRec };
            w.wIn = sampleWeights(inScheme, inRng, nIn, cell.width(), false);
            w.wRec = sampleWeights(recScheme, recRng, cell.nRec, cell.width(), true);
            w.b.assign(cell.width(), 0.0);
        }
        nIn = cell.nRec;
        built.net.layers.push_back({ std::move(cell), std::move(w) });
    }

    auto readoutRng { root.substream("readout") };
    const InitScheme readout { VarianceRule::glorot, WeightDistribution::uniform, nIn, outputs };
    built.net.readout = { sampleWeights(readout, readoutRng, nIn, outputs, false),
                          std::vector<double>(outputs, 0.0) };
    built.net.validate();
    return built;
}

auto initReport(const ExperimentConfig& cfg, const DatasetStats& input, const BuiltNetwork& built)
  -> std::string
{
    std::ostringstream out;
    out << "init.mode=" << toString(cfg.init.mode) << '\n';
    out << "mask="
        << (cfg.init.mode == InitMode::conditioned ? cfg.init.mask.toString() : std::string { "none" })
        << '\n';
    out << "reset=" << toString(cfg.model.reset) << '\n';
    out << "shape=" << toString(cfg.surrogate.shape) << '\n';
    out << "bounds=" << toString(cfg.init.bounds) << '\n';
    out << "mean_z=" << num(input.meanZ) << '\n';
    out << "var_z=" << num(input.varZ) << '\n';
    out << "layers=" << built.net.layers.size() << '\n';
    bool feasible { true };
    for (std::size_t l {}; l < built.net.layers.size(); ++l) {
        const auto& layer { built.net.layers[l] };
        const std::string p { "layer" + std::to_string(l) + "." };
        if (cfg.init.mode == InitMode::conditioned) {
            const auto& s { built.solved[l] };
            out << p << "mean_w_rec=" << num(s.meanWrec) << '\n';
            out << p << "var_w_rec=" << num(s.varWrec) << '\n';
            out << p << "gamma=" << num(s.gamma) << '\n';
            out << p << "sharpness=" << num(s.sharpness) << '\n';
            out << p << "target_second_moment=" << num(s.targetSecondMoment) << '\n';
            out << p << "attained_second_moment=" << num(s.attainedSecondMoment) << '\n';
            out << p << "y_min=" << num(s.yMin) << '\n';
            out << p << "y_max=" << num(s.yMax) << '\n';
            out << p << "sharpness_clamped=" << (s.sharpnessClamped ? "true" : "false") << '\n';
            out << p << "feasible=" << (s.feasible ? "true" : "false") << '\n';
            if (!s.feasible) {
                out << p << "reason=" << s.reason << '\n';
            }
            for (std::size_t k {}; k < s.notes.size(); ++k) {
                out << p << "note" << k << '=' << s.notes[k] << '\n';
            }
            feasible = feasible && s.feasible;
        } else {
            const auto& w { layer.w.wRec };
            double sum {};
            double sq {};
            std::size_t n {};
            for (std::size_t r {}; r < w.rows(); ++r) {
                for (std::size_t c {}; c < w.cols(); ++c) {
                    if (c % w.rows() != r) {
                        sum += w(r, c);
                        sq += w(r, c) * w(r, c);
                        ++n;
                    }
                }
            }
            const double mean { n ? sum / static_cast<double>(n) : 0.0 };
            out << p << "rule=" << toString(cfg.init.rule) << '\n';
            out << p << "distribution=" << toString(cfg.init.distribution) << '\n';
            out << p << "mean_w_rec=" << num(mean) << '\n';
            out << p << "var_w_rec=" << num(n ? sq / static_cast<double>(n) - mean * mean : 0.0)
                << '\n';
            out << p << "gamma=" << num(layer.cfg.surrogate.gamma) << '\n';
            out << p << "sharpness=" << num(layer.cfg.surrogate.sharpness) << '\n';
            out << p << "feasible=true\n";
        }
    }
    out << "feasible=" << (feasible ? "true" : "false") << '\n';
    return out.str();
}

auto writeWeights(std::ostream& out, const Network& net) -> void
{
    auto matrix = [&](const std::string& name, const Matrix& m) {
        out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (std::size_t r {}; r < m.rows(); ++r) {
            for (std::size_t c {}; c < m.cols(); ++c) {
                out << (c ? " " : "") << num(m(r, c));
            }
            out << '\n';
        }
    };
    auto vector = [&](const std::string& name, const std::vector<double>& v) {
        out << name << " 1 " << v.size() << '\n';
        for (std::size_t i {}; i < v.size(); ++i) {
            out << (i ? " " : "") << num(v[i]);
        }
        out << '\n';
    };
    out << "#sgkit-weights layers=" << net.layers.size() << '\n';
    for (std::size_t l {}; l < net.layers.size(); ++l) {
        const auto& layer { net.layers[l] };
        const std::string p { "layer" + std::to_string(l) + "." };
        out << "#" << p << "cell=" << toString(layer.cfg.kind)
            << " gamma=" << num(layer.cfg.surrogate.gamma)
            << " sharpness=" << num(layer.cfg.surrogate.sharpness) << '\n';
        matrix(p + "w_in", layer.w.wIn);
        matrix(p + "w_rec", layer.w.wRec);
        vector(p + "b", layer.w.b);
    }
    matrix("readout.w", net.readout.w);
    vector("readout.b", net.readout.b);
}

auto probeNetwork(const Network& net, const std::vector<Matrix>& inputs, Rng& rng)
  -> std::vector<ProbeRow>
{
    if (inputs.empty()) {
        throw Error { ErrorKind::domain, "probe: needs at least one input sequence" };
    }
    const std::size_t steps { inputs.front().rows() };
    const std::size_t layers { net.layers.size() };
    struct Pool
    {
        std::vector<double> x, v, rec, in;
        double gradVar {};
        double gradMax {};
    };
    std::vector<Pool> pools(steps * layers);

    for (std::size_t s {}; s < inputs.size(); ++s) {
        if (inputs[s].rows() != steps) {
            throw Error { ErrorKind::shape, "probe: input sequences differ in length" };
        }
        const auto fwd { stackForward(net, inputs[s], true) };
        Matrix lossGrad(steps, net.outputWidth(), 0.0);
        auto gradRng { rng.substream("loss").substream(s) };
        const auto noise { sample(gradRng, NormalDist { 0.0, 1.0 }, net.outputWidth()) };
        std::copy(noise.begin(), noise.end(), lossGrad.row(steps - 1).begin());
        const auto grads { gradProbe(net, fwd.tape, lossGrad) };

        for (std::size_t l {}; l < layers; ++l) {
            const auto& cfg { net.layers[l].cfg };
            const auto& w { net.layers[l].w };
            const auto& tape { fwd.tape.layers[l] };
            const Matrix& voltage { cfg.kind == CellKind::slstm ? tape.c : tape.y };
            std::vector<double> rec(cfg.width());
            std::vector<double> in(cfg.width());
            for (std::size_t t {}; t < steps; ++t) {
                auto& pool { pools[t * layers + l] };
                const auto x { tape.x.row(t) };
                pool.x.insert(pool.x.end(), x.begin(), x.end());
                const auto v { voltage.row(t) };
                pool.v.insert(pool.v.end(), v.begin(), v.end());
                std::fill(rec.begin(), rec.end(), 0.0);
                if (t > 0) {
                    accumulateRows(tape.x.row(t - 1), w.wRec, rec);
                }
                std::fill(in.begin(), in.end(), 0.0);
                accumulateRows(tape.z.row(t), w.wIn, in);
                pool.rec.insert(pool.rec.end(), rec.begin(), rec.end());
                pool.in.insert(pool.in.end(), in.begin(), in.end());
                const auto& g { grads.stats[l][t] };
                pool.gradVar += g.variance / static_cast<double>(inputs.size());
                pool.gradMax = std::max(pool.gradMax, g.max);
            }
        }
    }

    std::vector<ProbeRow> rows;
    rows.reserve(pools.size());
    for (std::size_t t {}; t < steps; ++t) {
        for (std::size_t l {}; l < layers; ++l) {
            const auto& pool { pools[t * layers + l] };
            const auto v { stats(pool.v) };
            rows.push_back({ t, l, stats(pool.x).mean, v.mean, v.median, v.variance,
                             stats(pool.rec).variance, stats(pool.in).variance, pool.gradVar,
                             pool.gradMax });
        }
    }
    return rows;
}

auto writeProbe(std::ostream& out, const std::vector<ProbeRow>& rows) -> void
{
    out << "t,layer,firing_rate,mean_v,median_v,var_v,recurrent_term_var,input_term_var,"
           "grad_var,grad_max\n";
    for (const auto& r : rows) {
        out << r.t << ',' << r.layer << ',' << num(r.firingRate) << ',' << num(r.meanV) << ','
            << num(r.medianV) << ',' << num(r.varV) << ',' << num(r.recurrentTermVar) << ','
            << num(r.inputTermVar) << ',' << num(r.gradVar) << ',' << num(r.gradMax) << '\n';
    }
}

auto applySweepValue(ExperimentConfig& cfg, std::string_view axis, std::string_view value) -> void
{
    if (axis == "dampening") {
        cfg.set("surrogate.gamma", value);
        cfg.init.mask.c3 = false;
    } else if (axis == "sharpness") {
        cfg.set("surrogate.sharpness", value);
        cfg.init.mask.c4 = false;
    } else if (axis == "tail_q") {
        cfg.surrogate.shape = SurrogateShape::qpseudospike;
        cfg.set("surrogate.q", value);
    } else if (axis == "shape") {
        cfg.set("surrogate.shape", value);
    } else if (axis == "init_scheme") {
        // "conditioned", a rule name, or <rule>-<distribution>.
        if (value == "conditioned") {
            cfg.init.mode = InitMode::conditioned;
            return;
        }
        cfg.init.mode = InitMode::scheme;
        if (parseVarianceRule(value)) {
            cfg.set("init.rule", value);
            return;
        }
        const auto dash { value.rfind('-') };
        if (dash == std::string_view::npos) {
            throw Error { ErrorKind::config,
                          "sweep: init_scheme value '" + std::string { value } + "' is unknown" };
        }
        cfg.set("init.rule", value.substr(0, dash));
        cfg.set("init.distribution", value.substr(dash + 1));
    } else {
        throw Error { ErrorKind::config,
                      "sweep: unknown axis '" + std::string { axis }
                        + "' (dampening, sharpness, tail_q, shape or init_scheme)" };
    }
}

auto writeSweep(std::ostream& out, const std::vector<SweepRow>& rows) -> void
{
    out << "axis,value,seed,final_val_acc,final_val_loss,status\n";
    for (const auto& r : rows) {
        out << r.axis << ',' << r.value << ',' << r.seed << ',' << num(r.finalValAcc) << ','
            << num(r.finalValLoss) << ',' << (r.ok ? "ok" : "failed") << '\n';
    }
}

auto runInitSolve(const ExperimentConfig& cfg, std::ostream& out) -> bool
{
    cfg.validate();
    const auto task { loadTask(cfg) };
    const auto input { datasetStats(task.train) };
    const auto built { buildNetwork(cfg, input, task.train.channels, task.classes, cfg.seed) };
    const auto report { initReport(cfg, input, built) };
    out << report;
    const auto dir { ensureDir(cfg.outputDir) };
    openOut(dir / "init_solve.txt") << report;
    return report.find("\nfeasible=true\n") != std::string::npos;
}

auto runTrain(const ExperimentConfig& cfg, std::ostream& out) -> History
{
    cfg.validate();
    const auto dir { ensureDir(cfg.outputDir) };
    openOut(dir / "config.txt") << echoConfig(cfg);
    const auto task { loadTask(cfg) };
    const auto input { datasetStats(task.train) };
    auto built { buildNetwork(cfg, input, task.train.channels, task.classes, cfg.seed) };
    auto train { cfg.train };
    train.seed = cfg.seed;
    const auto history { fit(built.net, task.train, task.validation, train,
                             [&](const EpochRecord& r) {
                                 out << "epoch " << r.epoch << " train_loss=" << num(r.trainLoss)
                                     << " val_loss=" << num(r.valLoss)
                                     << " val_mode_acc=" << num(r.valModeAcc) << '\n';
                                 return true;
                             }) };
    auto csv { openOut(dir / "history.csv") };
    writeHistory(csv, history);
    auto weights { openOut(dir / "weights.txt") };
    writeWeights(weights, built.net);
    return history;
}

auto runSweep(const ExperimentConfig& cfg, std::ostream& out, std::size_t threads)
  -> std::vector<SweepRow>
{
    cfg.validate();
    if (cfg.sweep.values.empty()) {
        throw Error { ErrorKind::config, "sweep.values must not be empty" };
    }
    // Reject bad axes and values before any training starts.
    for (const auto& v : cfg.sweep.values) {
        auto probe { cfg };
        applySweepValue(probe, cfg.sweep.axis, v);
        probe.validate();
    }
    const auto dir { ensureDir(cfg.outputDir) };
    const auto cellDir { ensureDir((dir / "sweep").string()) };
    openOut(dir / "config.txt") << echoConfig(cfg);
    const auto task { loadTask(cfg) };
    const auto input { datasetStats(task.train) };

    const std::size_t cells { cfg.sweep.values.size() * cfg.sweep.seeds };
    std::vector<SweepRow> rows(cells);
    std::vector<std::string> histories(cells);
    std::atomic<std::size_t> next { 0 };
    auto worker = [&] {
        for (std::size_t i { next++ }; i < cells; i = next++) {
            const auto& value { cfg.sweep.values[i / cfg.sweep.seeds] };
            const std::uint64_t seed { cfg.seed + i % cfg.sweep.seeds };
            auto& row { rows[i] };
            row = { cfg.sweep.axis, value, seed, std::nan(""), std::nan(""), false, {} };
            try {
                auto cell { cfg };
                applySweepValue(cell, cfg.sweep.axis, value);
                cell.seed = seed;
                auto built { buildNetwork(cell, input, task.train.channels, task.classes, seed) };
                auto train { cell.train };
                train.seed = seed;
                const auto history { fit(built.net, task.train, task.validation, train) };
                std::ostringstream csv;
                writeHistory(csv, history);
                histories[i] = csv.str();
                if (!history.empty()) {
                    row.finalValAcc = history.back().valModeAcc;
                    row.finalValLoss = history.back().valLoss;
                }
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    const std::size_t pool { std::max<std::size_t>(1, std::min(threads, cells)) };
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::thread> workers;
        for (std::size_t k {}; k < pool; ++k) {
            workers.emplace_back(worker);
        }
        for (auto& w : workers) {
            w.join();
        }
    }

    for (std::size_t i {}; i < cells; ++i) {
        const auto& r { rows[i] };
        if (r.ok) {
            openOut(std::filesystem::path { cellDir }
                    / ("cell" + std::to_string(i / cfg.sweep.seeds) + "_seed" + std::to_string(r.seed)
                       + ".csv"))
              << histories[i];
        }
        out << r.axis << '=' << r.value << " seed=" << r.seed << ' '
            << (r.ok ? "ok val_mode_acc=" + num(r.finalValAcc) : "failed: " + r.error) << '\n';
    }
    auto csv { openOut(dir / "sweep.csv") };
    writeSweep(csv, rows);
    return rows;
}

auto runProbe(const ExperimentConfig& cfg, std::ostream& out) -> std::vector<ProbeRow>
{
    cfg.validate();
    const auto task { loadTask(cfg) };
    const auto input { datasetStats(task.train) };
    const auto built { buildNetwork(cfg, input, task.train.channels, task.classes, cfg.seed) };

    std::vector<Matrix> inputs;
    if (task.templates) {
        auto rng { Rng { cfg.task.seed }.substream("task").substream("probe") };
        for (const auto& s : synthTask(rng, *task.templates, cfg.probe.steps, cfg.probe.samples)
                               .samples) {
            inputs.push_back(s.dense());
        }
    } else {
        const std::size_t n { std::min(cfg.probe.samples, task.train.samples.size()) };
        for (std::size_t i {}; i < n; ++i) {
            inputs.push_back(task.train.samples[i].dense());
        }
    }
    auto rng { Rng { cfg.seed }.substream("probe") };
    const auto rows { probeNetwork(built.net, inputs, rng) };
    const auto dir { ensureDir(cfg.outputDir) };
    auto csv { openOut(dir / "probe.csv") };
    writeProbe(csv, rows);
    out << "probe rows=" << rows.size() << " steps=" << inputs.front().rows()
        << " layers=" << built.net.layers.size() << '\n';
    return rows;
}

auto runEncode(const ExperimentConfig& cfg, std::ostream& out) -> void
{
    cfg.validate();
    const auto task { loadTask(cfg) };
    const auto dir { ensureDir(cfg.outputDir) };
    writeEventFile(dir / "train.events", task.train);
    writeEventFile(dir / "val.events", task.validation);
    const auto s { datasetStats(task.train) };
    out << "train_samples=" << task.train.samples.size() << '\n'
        << "val_samples=" << task.validation.samples.size() << '\n'
        << "channels=" << task.train.channels << '\n'
        << "steps=" << task.train.steps << '\n'
        << "mean_z=" << num(s.meanZ) << '\n'
        << "var_z=" << num(s.varZ) << '\n';
}

} // namespace sgkit
