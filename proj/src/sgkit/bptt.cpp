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

#include "sgkit/bptt.hpp"

#include "sgkit/error.hpp"
#include "sgkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgkit {

auto GradSet::zerosLike(const Network& net) -> GradSet
{
    GradSet g;
    for (const auto& layer : net.layers) {
        g.layers.push_back({ Matrix(layer.w.wIn.rows(), layer.w.wIn.cols()),
                             Matrix(layer.w.wRec.rows(), layer.w.wRec.cols()),
                             std::vector<double>(layer.w.b.size(), 0.0) });
    }
    g.readoutW = Matrix(net.readout.w.rows(), net.readout.w.cols());
    g.readoutB.assign(net.readout.b.size(), 0.0);
    return g;
}

namespace {

template <typename F>
auto forEachArray(GradSet& g, F&& f) -> void
{
    for (auto& layer : g.layers) {
        f(layer.wIn.values());
        f(layer.wRec.values());
        f(std::span<double> { layer.b });
    }
    f(g.readoutW.values());
    f(std::span<double> { g.readoutB });
}

template <typename F>
auto forEachArray(const GradSet& g, F&& f) -> void
{
    for (const auto& layer : g.layers) {
        f(layer.wIn.values());
        f(layer.wRec.values());
        f(std::span<const double> { layer.b });
    }
    f(g.readoutW.values());
    f(std::span<const double> { g.readoutB });
}

} // namespace

auto GradSet::add(const GradSet& other) -> void
{
    std::vector<std::span<const double>> theirs;
    forEachArray(other, [&theirs](std::span<const double> v) { theirs.push_back(v); });
    std::size_t k {};
    forEachArray(*this, [&theirs, &k](std::span<double> v) {
        const auto src { theirs.at(k++) };
        if (src.size() != v.size()) {
            throw Error { ErrorKind::shape, "GradSet::add: shape mismatch" };
        }
        for (std::size_t i {}; i < v.size(); ++i) {
            v[i] += src[i];
        }
    });
    if (k != theirs.size()) {
        throw Error { ErrorKind::shape, "GradSet::add: layer count mismatch" };
    }
}

auto GradSet::scale(double factor) -> void
{
    forEachArray(*this, [factor](std::span<double> v) {
        for (double& x : v) {
            x *= factor;
        }
    });
}

auto GradSet::squaredNorm() const -> double
{
    double total {};
    forEachArray(*this, [&total](std::span<const double> v) {
        for (const double x : v) {
            total += x * x;
        }
    });
    return total;
}

auto GradSet::finite() const -> bool
{
    bool ok { true };
    forEachArray(*this, [&ok](std::span<const double> v) { ok = ok && allFinite(v); });
    return ok;
}

auto parameterViews(Network& net) -> std::vector<ParamView>
{
    std::vector<ParamView> views;
    for (std::size_t l {}; l < net.layers.size(); ++l) {
        auto& w { net.layers[l].w };
        const std::string prefix { "layer" + std::to_string(l) + "." };
        views.push_back({ prefix + "w_in", w.wIn.values() });
        views.push_back({ prefix + "w_rec", w.wRec.values() });
        views.push_back({ prefix + "b", w.b });
    }
    views.push_back({ "readout.w", net.readout.w.values() });
    views.push_back({ "readout.b", net.readout.b });
    return views;
}

auto gradientViews(GradSet& grads) -> std::vector<ParamView>
{
    std::vector<ParamView> views;
    for (std::size_t l {}; l < grads.layers.size(); ++l) {
        auto& g { grads.layers[l] };
        const std::string prefix { "layer" + std::to_string(l) + "." };
        views.push_back({ prefix + "w_in", g.wIn.values() });
        views.push_back({ prefix + "w_rec", g.wRec.values() });
        views.push_back({ prefix + "b", g.b });
    }
    views.push_back({ "readout.w", grads.readoutW.values() });
    views.push_back({ "readout.b", grads.readoutB });
    return views;
}

namespace {

auto fire(ForwardMode mode, double v) -> double
{
    if (mode == ForwardMode::spiking) {
        return heaviside(v);
    }
    return 1.0 / (1.0 + std::exp(-4.0 * v));
}

auto summarize(std::span<const double> g) -> GradStat
{
    const double n { static_cast<double>(g.size()) };
    double mean {};
    double peak {};
    for (const double v : g) {
        mean += v;
        peak = std::max(peak, std::abs(v));
    }
    mean /= n;
    double var {};
    for (const double v : g) {
        var += (v - mean) * (v - mean);
    }
    return { var / n, peak };
}

auto divergence(std::size_t layer, std::size_t t) -> Error
{
    std::ostringstream msg;
    msg << "backward: non-finite gradient at layer " << layer << ", step " << t;
    return Error { ErrorKind::numeric, msg.str() };
}

// Reverse sweep of one spiking (LIF or ALIF) layer. extGx holds dL/dx from
// above for every step; gz, when given, receives dL/dz.
auto spikingLayerBackward(const Layer& layer,
                          const LayerTape& lt,
                          std::size_t index,
                          const Matrix& extGx,
                          LayerGrad& g,
                          Matrix* gz,
                          std::vector<GradStat>* probe) -> void
{
    const auto& cfg { layer.cfg };
    const auto& w { layer.w };
    const std::size_t n { cfg.nRec };
    const std::size_t steps { lt.x.rows() };
    const bool adaptive { cfg.kind == CellKind::alif };
    const bool subtractive { cfg.reset == ResetKind::subtractive };

    std::vector<double> gyCarry(n, 0.0);
    std::vector<double> gxCarry(n, 0.0);
    std::vector<double> gaCarry(n, 0.0);
    std::vector<double> gy(n);
    std::vector<double> gA(n);
    std::vector<double> gd(n);
    std::vector<double> gxPrev(n);
    const std::vector<double> silent(n, 0.0);

    for (std::size_t t { steps }; t-- > 0;) {
        const std::span<const double> xPrev { t > 0 ? lt.x.row(t - 1)
                                                    : std::span<const double> { silent } };
        for (std::size_t i {}; i < n; ++i) {
            const double gx { extGx(t, i) + gxCarry[i] };
            const double thrEff { lt.thrEff(t, i) };
            const double gv { pseudoDerivative(cfg.surrogate, lt.y(t, i) - thrEff) * gx };
            gy[i] = gyCarry[i] + gv;
            gA[i] = -gv;
        }
        if (!allFinite(gy)) {
            throw divergence(index, t);
        }
        if (probe != nullptr) {
            (*probe)[t] = summarize(gy);
        }
        for (std::size_t i {}; i < n; ++i) {
            const double thrEff { lt.thrEff(t, i) };
            if (subtractive) {
                gd[i] = gy[i];
                gyCarry[i] = cfg.alpha[i] * gy[i];
                gA[i] -= xPrev[i] * gy[i];
                gxPrev[i] = -thrEff * gy[i];
            } else {
                const double gu { cfg.alpha[i] * (1.0 - xPrev[i]) * gy[i] };
                gd[i] = gu;
                gyCarry[i] = gu;
                gxPrev[i] = -cfg.alpha[i] * lt.u(t, i) * gy[i];
            }
            if (adaptive) {
                const double ga { gaCarry[i] + cfg.beta * gA[i] };
                gaCarry[i] = cfg.rho * ga;
                gxPrev[i] += ga;
            }
        }
        accumulateCols(w.wRec, gd, gxPrev);
        addOuter(xPrev, gd, g.wRec);
        addOuter(lt.z.row(t), gd, g.wIn);
        for (std::size_t i {}; i < n; ++i) {
            g.b[i] += gd[i];
        }
        if (gz != nullptr) {
            accumulateCols(w.wIn, gd, gz->row(t));
        }
        gxCarry.swap(gxPrev);
    }
}

auto slstmLayerBackward(const Layer& layer,
                        const LayerTape& lt,
                        std::size_t index,
                        ForwardMode mode,
                        const Matrix& extGx,
                        LayerGrad& g,
                        Matrix* gz,
                        std::vector<GradStat>* probe) -> void
{
    const auto& cfg { layer.cfg };
    const auto& w { layer.w };
    const auto& sg { cfg.surrogate };
    const std::size_t n { cfg.nRec };
    const std::size_t steps { lt.x.rows() };

    std::vector<double> ghCarry(n, 0.0);
    std::vector<double> gcCarry(n, 0.0);
    std::vector<double> gc(n);
    std::vector<double> gpre(4 * n);
    const std::vector<double> silent(n, 0.0);

    for (std::size_t t { steps }; t-- > 0;) {
        const std::span<const double> cPrev { t > 0 ? lt.c.row(t - 1)
                                                    : std::span<const double> { silent } };
        const std::span<const double> hPrev { t > 0 ? lt.x.row(t - 1)
                                                    : std::span<const double> { silent } };
        const auto p { lt.pre.row(t) };
        for (std::size_t i {}; i < n; ++i) {
            const double gateI { fire(mode, p[i]) };
            const double gateO { fire(mode, p[2 * n + i]) };
            const double cand { 1.0 - 2.0 * fire(mode, p[3 * n + i]) };
            const double c { lt.c(t, i) };
            const double q { 1.0 - 2.0 * fire(mode, c) };
            const double gh { extGx(t, i) + ghCarry[i] };
            gc[i] = gcCarry[i] + gh * gateO * (-2.0 * pseudoDerivative(sg, c));
            gpre[2 * n + i] = gh * q * pseudoDerivative(sg, p[2 * n + i]);
            gpre[n + i] = gc[i] * cPrev[i] * pseudoDerivative(sg, p[n + i]);
            gpre[i] = gc[i] * cand * pseudoDerivative(sg, p[i]);
            gpre[3 * n + i] = gc[i] * gateI * (-2.0 * pseudoDerivative(sg, p[3 * n + i]));
            gcCarry[i] = gc[i] * fire(mode, p[n + i]);
        }
        if (!allFinite(gc) || !allFinite(gpre)) {
            throw divergence(index, t);
        }
        if (probe != nullptr) {
            (*probe)[t] = summarize(gc);
        }
        std::fill(ghCarry.begin(), ghCarry.end(), 0.0);
        accumulateCols(w.wRec, gpre, ghCarry);
        addOuter(hPrev, gpre, g.wRec);
        addOuter(lt.z.row(t), gpre, g.wIn);
        for (std::size_t k {}; k < gpre.size(); ++k) {
            g.b[k] += gpre[k];
        }
        if (gz != nullptr) {
            accumulateCols(w.wIn, gpre, gz->row(t));
        }
    }
}

auto sweep(const Network& net,
           const TapeRecord& tape,
           const Matrix& lossGrad,
           std::vector<std::vector<GradStat>>* probe) -> GradSet
{
    if (!tape.complete || tape.layers.size() != net.layers.size()) {
        throw Error { ErrorKind::state, "backward: tape is incomplete" };
    }
    const std::size_t steps { tape.steps };
    if (lossGrad.rows() != steps || lossGrad.cols() != net.outputWidth()) {
        throw Error { ErrorKind::shape, "backward: loss gradient must be T x n_out" };
    }
    auto grads { GradSet::zerosLike(net) };
    const std::size_t depth { net.layers.size() };
    const auto& top { tape.layers.back() };

    Matrix ext(steps, net.layers.back().cfg.nRec);
    for (std::size_t t {}; t < steps; ++t) {
        accumulateCols(net.readout.w, lossGrad.row(t), ext.row(t));
        addOuter(top.x.row(t), lossGrad.row(t), grads.readoutW);
        for (std::size_t k {}; k < grads.readoutB.size(); ++k) {
            grads.readoutB[k] += lossGrad(t, k);
        }
    }
    if (probe != nullptr) {
        probe->assign(depth, std::vector<GradStat>(steps));
    }

    for (std::size_t l { depth }; l-- > 0;) {
        const auto& layer { net.layers[l] };
        Matrix below;
        Matrix* gz { nullptr };
        if (l > 0) {
            below = Matrix(steps, layer.cfg.nIn);
            gz = &below;
        }
        auto* layerProbe { probe != nullptr ? &(*probe)[l] : nullptr };
        if (layer.cfg.kind == CellKind::slstm) {
            slstmLayerBackward(layer, tape.layers[l], l, tape.mode, ext, grads.layers[l], gz,
                               layerProbe);
        } else {
            spikingLayerBackward(layer, tape.layers[l], l, ext, grads.layers[l], gz, layerProbe);
        }
        maskDiagonal(grads.layers[l].wRec);
        ext = std::move(below);
    }
    return grads;
}

} // namespace

auto backward(const Network& net, const TapeRecord& tape, const Matrix& lossGrad) -> GradSet
{
    return sweep(net, tape, lossGrad, nullptr);
}

auto gradProbe(const Network& net, const TapeRecord& tape, const Matrix& lossGrad)
  -> GradProbe
{
    GradProbe result;
    result.grads = sweep(net, tape, lossGrad, &result.stats);
    return result;
}

auto softForwardBackward(const Network& net,
                         const Matrix& inputs,
                         std::size_t target,
                         double labelSmoothing) -> SoftResult
{
    for (const auto& layer : net.layers) {
        const auto& sg { layer.cfg.surrogate };
        if (sg.shape != SurrogateShape::dsigmoid || sg.gamma != 1.0 || sg.sharpness != 1.0) {
            throw Error { ErrorKind::usage,
                          "softForwardBackward: every layer needs the dsigmoid surrogate "
                          "with unit dampening and sharpness" };
        }
    }
    auto forward { stackForward(net, inputs, true, ForwardMode::soft) };
    auto loss { smoothedXent(forward.outputs, target, labelSmoothing) };
    return { loss.loss, std::move(forward.outputs), backward(net, forward.tape, loss.grad) };
}

} // namespace sgkit
