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

#include "sgkit/train.hpp"

#include "sgkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

namespace sgkit {

auto toString(OptimizerKind kind) -> std::string_view
{
    return kind == OptimizerKind::adabelief ? "adabelief" : "adam";
}

auto parseOptimizerKind(std::string_view name) -> std::optional<OptimizerKind>
{
    if (name == "adabelief") {
        return OptimizerKind::adabelief;
    }
    if (name == "adam") {
        return OptimizerKind::adam;
    }
    return std::nullopt;
}

auto TrainConfig::validate() const -> void
{
    if (!(lr > 0.0)) {
        throw Error { ErrorKind::parameter, "train: lr must be > 0" };
    }
    if (!(labelSmoothing >= 0.0 && labelSmoothing < 1.0)) {
        throw Error { ErrorKind::parameter, "train: label smoothing must lie in [0, 1)" };
    }
    if (!(clipNorm > 0.0)) {
        throw Error { ErrorKind::parameter, "train: clip norm must be > 0" };
    }
    if (!(weightDecay >= 0.0)) {
        throw Error { ErrorKind::parameter, "train: weight decay must be >= 0" };
    }
    if (batchSize == 0) {
        throw Error { ErrorKind::parameter, "train: batch size must be > 0" };
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
        throw Error { ErrorKind::parameter, "train: need 0 <= beta < 1 and eps > 0" };
    }
}

auto smoothedXent(const Matrix& logits, std::size_t target, double labelSmoothing)
  -> LossResult
{
    const std::size_t steps { logits.rows() };
    const std::size_t classes { logits.cols() };
    if (classes < 2) {
        throw Error { ErrorKind::domain, "smoothedXent: needs at least two classes" };
    }
    if (steps == 0) {
        throw Error { ErrorKind::domain, "smoothedXent: needs at least one step" };
    }
    if (target >= classes) {
        throw Error { ErrorKind::domain, "smoothedXent: target out of range" };
    }
    if (!allFinite(logits)) {
        throw Error { ErrorKind::numeric, "smoothedXent: non-finite logits" };
    }
    const double off { labelSmoothing / static_cast<double>(classes) };
    const double on { 1.0 - labelSmoothing + off };
    const double invSteps { 1.0 / static_cast<double>(steps) };

    LossResult result { 0.0, Matrix(steps, classes) };
    for (std::size_t t {}; t < steps; ++t) {
        const auto row { logits.row(t) };
        const double peak { *std::max_element(row.begin(), row.end()) };
        double sum {};
        for (const double v : row) {
            sum += std::exp(v - peak);
        }
        const double lse { peak + std::log(sum) };
        double loss {};
        for (std::size_t k {}; k < classes; ++k) {
            const double q { k == target ? on : off };
            loss -= q * (row[k] - lse);
            result.grad(t, k) = (std::exp(row[k] - lse) - q) * invSteps;
        }
        result.loss += loss;
    }
    result.loss *= invSteps;
    return result;
}

auto modeAccuracy(const Matrix& logits, std::size_t target) -> ModePrediction
{
    const std::size_t steps { logits.rows() };
    const std::size_t classes { logits.cols() };
    if (steps == 0 || classes == 0) {
        throw Error { ErrorKind::domain, "modeAccuracy: needs at least one step and class" };
    }
    std::vector<std::size_t> count(classes, 0);
    std::vector<std::size_t> longest(classes, 0);
    std::size_t runClass { classes };
    std::size_t runLength {};
    for (std::size_t t {}; t < steps; ++t) {
        const auto row { logits.row(t) };
        const auto k { static_cast<std::size_t>(
          std::max_element(row.begin(), row.end()) - row.begin()) };
        ++count[k];
        runLength = k == runClass ? runLength + 1 : 1;
        runClass = k;
        longest[k] = std::max(longest[k], runLength);
    }
    std::size_t best {};
    for (std::size_t k { 1 }; k < classes; ++k) {
        if (count[k] > count[best] || (count[k] == count[best] && longest[k] > longest[best])) {
            best = k;
        }
    }
    return { best == target, best };
}

auto clipGradients(GradSet& grads, double clipNorm) -> double
{
    const double norm { std::sqrt(grads.squaredNorm()) };
    if (norm > clipNorm) {
        grads.scale(clipNorm / norm);
    }
    return norm;
}

Optimizer::Optimizer(const Network& net, const TrainConfig& cfg)
  : cfg_ { cfg }
{
    cfg_.validate();
    auto copy { net };
    for (const auto& view : parameterViews(copy)) {
        m_.emplace_back(view.values.size(), 0.0);
        s_.emplace_back(view.values.size(), 0.0);
    }
}

auto Optimizer::step(Network& net, GradSet& grads) -> double
{
    const double norm { clipGradients(grads, cfg_.clipNorm) };
    auto params { parameterViews(net) };
    auto gradients { gradientViews(grads) };
    if (params.size() != m_.size() || gradients.size() != m_.size()) {
        throw Error { ErrorKind::shape, "optimizer: parameter layout changed" };
    }
    ++t_;
    const double b1 { cfg_.beta1 };
    const double b2 { cfg_.beta2 };
    const double bc1 { 1.0 - std::pow(b1, static_cast<double>(t_)) };
    const double bc2 { 1.0 - std::pow(b2, static_cast<double>(t_)) };
    const double decay { 1.0 - cfg_.lr * cfg_.weightDecay };
    const bool belief { cfg_.optimizer == OptimizerKind::adabelief };

    for (std::size_t k {}; k < params.size(); ++k) {
        auto w { params[k].values };
        const auto g { gradients[k].values };
        auto& m { m_[k] };
        auto& s { s_[k] };
        if (w.size() != g.size() || w.size() != m.size()) {
            throw Error { ErrorKind::shape, "optimizer: shape mismatch in " + params[k].name };
        }
        for (std::size_t i {}; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            if (belief) {
                const double dev { g[i] - m[i] };
                s[i] = b2 * s[i] + (1.0 - b2) * dev * dev + cfg_.eps;
            } else {
                s[i] = b2 * s[i] + (1.0 - b2) * g[i] * g[i];
            }
            const double denom { std::sqrt(s[i] / bc2) + cfg_.eps };
            w[i] = w[i] * decay - cfg_.lr * (m[i] / bc1) / denom;
        }
        if (!allFinite(w)) {
            throw Error { ErrorKind::numeric, "optimizer: non-finite update in " + params[k].name };
        }
    }
    for (auto& layer : net.layers) {
        maskDiagonal(layer.w.wRec);
    }
    return norm;
}

auto evaluate(const Network& net, const Dataset& data, double labelSmoothing, ForwardMode mode)
  -> Evaluation
{
    if (data.samples.empty()) {
        throw Error { ErrorKind::domain, "evaluate: empty dataset" };
    }
    double loss {};
    std::size_t hits {};
    for (const auto& s : data.samples) {
        const auto forward { stackForward(net, s.dense(), false, mode) };
        loss += smoothedXent(forward.outputs, s.label, labelSmoothing).loss;
        hits += modeAccuracy(forward.outputs, s.label).correct ? 1 : 0;
    }
    const double n { static_cast<double>(data.samples.size()) };
    return { loss / n, static_cast<double>(hits) / n };
}

namespace {

auto blendInto(Network& avg, Network& net, double weight) -> void
{
    auto a { parameterViews(avg) };
    auto w { parameterViews(net) };
    for (std::size_t k {}; k < a.size(); ++k) {
        for (std::size_t i {}; i < a[k].values.size(); ++i) {
            a[k].values[i] += (w[k].values[i] - a[k].values[i]) * weight;
        }
    }
}

} // namespace

auto fit(Network& net,
         const Dataset& train,
         const Dataset& validation,
         const TrainConfig& cfg,
         const EpochCallback& onEpoch) -> History
{
    cfg.validate();
    net.validate();
    History history;
    if (cfg.epochs == 0) {
        return history;
    }
    if (train.samples.empty() || validation.samples.empty()) {
        throw Error { ErrorKind::domain, "fit: train and validation sets must be non-empty" };
    }
    if (train.channels != net.inputWidth() || validation.channels != net.inputWidth()) {
        throw Error { ErrorKind::shape, "fit: dataset channels do not match the network input" };
    }

    const Rng root { cfg.seed };
    Optimizer optimizer { net, cfg };
    const std::size_t tail { cfg.tailAverage ? std::max<std::size_t>(1, (cfg.epochs + 3) / 4)
                                             : 0 };
    std::optional<Network> average;
    std::size_t averaged {};

    std::vector<std::size_t> order(train.samples.size());
    for (std::size_t epoch { 1 }; epoch <= cfg.epochs; ++epoch) {
        auto shuffle { root.substream("shuffle").substream(epoch) };
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        for (std::size_t i { order.size() }; i > 1; --i) {
            std::swap(order[i - 1], order[shuffle.next() % i]);
        }

        double epochLoss {};
        try {
            for (std::size_t start {}; start < order.size(); start += cfg.batchSize) {
                const std::size_t stop { std::min(order.size(), start + cfg.batchSize) };
                auto batch { GradSet::zerosLike(net) };
                for (std::size_t j { start }; j < stop; ++j) {
                    const auto& sample { train.samples[order[j]] };
                    if (cfg.mode == ForwardMode::soft) {
                        const auto soft { softForwardBackward(net, sample.dense(), sample.label,
                                                              cfg.labelSmoothing) };
                        epochLoss += soft.loss;
                        batch.add(soft.grads);
                        continue;
                    }
                    const auto forward { stackForward(net, sample.dense(), true) };
                    const auto loss { smoothedXent(forward.outputs, sample.label,
                                                   cfg.labelSmoothing) };
                    epochLoss += loss.loss;
                    batch.add(backward(net, forward.tape, loss.grad));
                }
                batch.scale(1.0 / static_cast<double>(stop - start));
                optimizer.step(net, batch);
            }
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "training diverged at epoch " << epoch << ": " << e.what();
            throw Error { ErrorKind::numeric, msg.str() };
        }
        epochLoss /= static_cast<double>(order.size());
        if (!std::isfinite(epochLoss)) {
            std::ostringstream msg;
            msg << "training diverged at epoch " << epoch << ": loss is not finite";
            throw Error { ErrorKind::numeric, msg.str() };
        }

        const Network* scored { &net };
        if (tail > 0 && epoch + tail > cfg.epochs) {
            if (!average) {
                average = net;
            }
            ++averaged;
            blendInto(*average, net, 1.0 / static_cast<double>(averaged));
            scored = &*average;
        }
        const auto val { evaluate(*scored, validation, cfg.labelSmoothing, cfg.mode) };
        history.push_back({ epoch, epochLoss, val.loss, val.modeAccuracy });
        if (onEpoch && !onEpoch(history.back())) {
            break;
        }
    }
    if (average) {
        net = std::move(*average);
    }
    return history;
}

auto writeHistory(std::ostream& out, const History& history) -> void
{
    out << "epoch,train_loss,val_loss,val_mode_acc\n";
    char buf[128];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.trainLoss,
                      r.valLoss, r.valModeAcc);
        out << buf;
    }
}

} // namespace sgkit
