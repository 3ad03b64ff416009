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

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgkit {

auto toString(CellKind kind) -> std::string_view
{
    switch (kind) {
    case CellKind::lif:
        return "lif";
    case CellKind::alif:
        return "alif";
    case CellKind::slstm:
        return "slstm";
    }
    return "unknown";
}

auto toString(ResetKind kind) -> std::string_view
{
    return kind == ResetKind::subtractive ? "subtractive" : "multiplicative";
}

auto parseCellKind(std::string_view name) -> std::optional<CellKind>
{
    for (const auto kind : { CellKind::lif, CellKind::alif, CellKind::slstm }) {
        if (toString(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

auto parseResetKind(std::string_view name) -> std::optional<ResetKind>
{
    for (const auto kind : { ResetKind::subtractive, ResetKind::multiplicative }) {
        if (toString(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

auto CellConfig::uniform(CellKind kind,
                         std::size_t nIn,
                         std::size_t nRec,
                         double alpha,
                         double thr) -> CellConfig
{
    CellConfig cfg;
    cfg.kind = kind;
    cfg.nIn = nIn;
    cfg.nRec = nRec;
    cfg.alpha.assign(nRec, alpha);
    cfg.thr.assign(nRec, thr);
    return cfg;
}

auto CellConfig::width() const -> std::size_t
{
    return kind == CellKind::slstm ? 4 * nRec : nRec;
}

auto CellConfig::validate() const -> void
{
    if (nRec == 0 || nIn == 0) {
        throw Error { ErrorKind::shape, "cell: n_in and n_rec must be positive" };
    }
    if (alpha.size() != nRec || thr.size() != nRec) {
        throw Error { ErrorKind::shape, "cell: per-neuron vectors must have length n_rec" };
    }
    for (std::size_t i {}; i < nRec; ++i) {
        if (!(alpha[i] > 0.0 && alpha[i] < 1.0)) {
            throw Error { ErrorKind::parameter, "cell: decay must lie in (0, 1)" };
        }
        if (!(thr[i] > 0.0) || !std::isfinite(thr[i])) {
            throw Error { ErrorKind::parameter, "cell: threshold must be > 0" };
        }
    }
    if (kind == CellKind::alif && (!(rho >= 0.0 && rho < 1.0) || !(beta >= 0.0))) {
        throw Error { ErrorKind::parameter, "cell: ALIF needs rho in [0, 1) and beta >= 0" };
    }
    surrogate.validate();
}

auto CellState::zeros(const CellConfig& cfg) -> CellState
{
    CellState s;
    s.x.assign(cfg.nRec, 0.0);
    if (cfg.kind == CellKind::slstm) {
        s.c.assign(cfg.nRec, 0.0);
    } else {
        s.y.assign(cfg.nRec, 0.0);
    }
    if (cfg.kind == CellKind::alif) {
        s.a.assign(cfg.nRec, 0.0);
    }
    return s;
}

auto WeightSet::zeros(const CellConfig& cfg) -> WeightSet
{
    return { Matrix(cfg.nIn, cfg.width()), Matrix(cfg.nRec, cfg.width()),
             std::vector<double>(cfg.width(), 0.0) };
}

auto maskDiagonal(Matrix& wRec) -> void
{
    const std::size_t n { wRec.rows() };
    for (std::size_t block {}; n > 0 && block < wRec.cols() / n; ++block) {
        for (std::size_t i {}; i < n; ++i) {
            wRec(i, block * n + i) = 0.0;
        }
    }
}

auto diagonalIsZero(const Matrix& wRec) -> bool
{
    const std::size_t n { wRec.rows() };
    for (std::size_t block {}; n > 0 && block < wRec.cols() / n; ++block) {
        for (std::size_t i {}; i < n; ++i) {
            if (wRec(i, block * n + i) != 0.0) {
                return false;
            }
        }
    }
    return true;
}

namespace {

auto fire(ForwardMode mode, double v) -> double
{
    if (mode == ForwardMode::spiking) {
        return heaviside(v);
    }
    return 1.0 / (1.0 + std::exp(-4.0 * v));
}

auto checkShapes(const CellConfig& cfg,
                 const WeightSet& w,
                 const CellState& state,
                 std::span<const double> z) -> void
{
    const std::size_t width { cfg.width() };
    const bool stateOk { state.x.size() == cfg.nRec
                         && (cfg.kind == CellKind::slstm ? state.c.size() == cfg.nRec
                                                         : state.y.size() == cfg.nRec)
                         && (cfg.kind != CellKind::alif || state.a.size() == cfg.nRec) };
    if (z.size() != cfg.nIn || w.wIn.rows() != cfg.nIn || w.wIn.cols() != width
        || w.wRec.rows() != cfg.nRec || w.wRec.cols() != width || w.b.size() != width
        || !stateOk) {
        throw Error { ErrorKind::shape, "cell step: inconsistent shapes" };
    }
}

auto nonFinite(std::string_view what) -> Error
{
    std::ostringstream msg;
    msg << "cell step: non-finite " << what;
    return Error { ErrorKind::numeric, msg.str() };
}

// Optional per-step outputs needed by the reverse pass.
struct StepRecord
{
    std::span<double> thrEff;
    std::span<double> u;
    std::span<double> pre;
};

// Advances prev into next. drive is scratch of length cfg.width().
auto advance(const CellConfig& cfg,
             const WeightSet& w,
             ForwardMode mode,
             const CellState& prev,
             std::span<const double> z,
             CellState& next,
             std::vector<double>& drive,
             const StepRecord& rec) -> void
{
    std::copy(w.b.begin(), w.b.end(), drive.begin());
    accumulateRows(z, w.wIn, drive);
    accumulateRows(prev.x, w.wRec, drive);
    const std::size_t n { cfg.nRec };

    if (cfg.kind == CellKind::slstm) {
        for (std::size_t i {}; i < n; ++i) {
            const double gi { fire(mode, drive[i]) };
            const double gf { fire(mode, drive[n + i]) };
            const double go { fire(mode, drive[2 * n + i]) };
            const double cand { 1.0 - 2.0 * fire(mode, drive[3 * n + i]) };
            const double c { gf * prev.c[i] + gi * cand };
            next.c[i] = c;
            next.x[i] = go * (1.0 - 2.0 * fire(mode, c));
        }
        if (!rec.pre.empty()) {
            std::copy(drive.begin(), drive.end(), rec.pre.begin());
        }
        if (!allFinite(next.c)) {
            throw nonFinite("cell state");
        }
        return;
    }

    const bool adaptive { cfg.kind == CellKind::alif };
    for (std::size_t i {}; i < n; ++i) {
        double threshold { cfg.thr[i] };
        if (adaptive) {
            next.a[i] = cfg.rho * prev.a[i] + prev.x[i];
            threshold += cfg.beta * next.a[i];
        }
        double y {};
        if (cfg.reset == ResetKind::subtractive) {
            y = cfg.alpha[i] * prev.y[i] + drive[i] - threshold * prev.x[i];
        } else {
            const double u { prev.y[i] + drive[i] };
            y = cfg.alpha[i] * u * (1.0 - prev.x[i]);
            if (!rec.u.empty()) {
                rec.u[i] = u;
            }
        }
        next.y[i] = y;
        next.x[i] = fire(mode, y - threshold);
        if (!rec.thrEff.empty()) {
            rec.thrEff[i] = threshold;
        }
    }
    if (!allFinite(next.y)) {
        throw nonFinite("voltage");
    }
}

auto step(const CellConfig& cfg,
          const WeightSet& w,
          const CellState& state,
          std::span<const double> z,
          ForwardMode mode) -> CellState
{
    checkShapes(cfg, w, state, z);
    auto next { CellState::zeros(cfg) };
    std::vector<double> drive(cfg.width());
    advance(cfg, w, mode, state, z, next, drive, {});
    return next;
}

} // namespace

auto lifStep(const CellConfig& cfg,
             const WeightSet& w,
             const CellState& state,
             std::span<const double> z,
             ForwardMode mode) -> CellState
{
    if (cfg.kind != CellKind::lif) {
        throw Error { ErrorKind::usage, "lifStep: config is not a LIF cell" };
    }
    return step(cfg, w, state, z, mode);
}

auto alifStep(const CellConfig& cfg,
              const WeightSet& w,
              const CellState& state,
              std::span<const double> z,
              ForwardMode mode) -> CellState
{
    if (cfg.kind != CellKind::alif) {
        throw Error { ErrorKind::usage, "alifStep: config is not an ALIF cell" };
    }
    return step(cfg, w, state, z, mode);
}

auto slstmStep(const CellConfig& cfg,
               const WeightSet& w,
               const CellState& state,
               std::span<const double> z,
               ForwardMode mode) -> CellState
{
    if (cfg.kind != CellKind::slstm) {
        throw Error { ErrorKind::usage, "slstmStep: config is not an sLSTM cell" };
    }
    return step(cfg, w, state, z, mode);
}

auto cellStep(const CellConfig& cfg,
              const WeightSet& w,
              const CellState& state,
              std::span<const double> z,
              ForwardMode mode) -> CellState
{
    return step(cfg, w, state, z, mode);
}

auto Network::inputWidth() const -> std::size_t
{
    return layers.empty() ? 0 : layers.front().cfg.nIn;
}

auto Network::outputWidth() const -> std::size_t
{
    return readout.w.cols();
}

auto Network::validate() const -> void
{
    if (layers.empty()) {
        throw Error { ErrorKind::shape, "network: no layers" };
    }
    for (std::size_t l {}; l < layers.size(); ++l) {
        const auto& [cfg, w] = layers[l];
        cfg.validate();
        if (l > 0 && cfg.nIn != layers[l - 1].cfg.nRec) {
            std::ostringstream msg;
            msg << "network: layer " << l << " expects " << cfg.nIn
                << " inputs but the layer below has " << layers[l - 1].cfg.nRec;
            throw Error { ErrorKind::shape, msg.str() };
        }
        const std::size_t width { cfg.width() };
        if (w.wIn.rows() != cfg.nIn || w.wIn.cols() != width || w.wRec.rows() != cfg.nRec
            || w.wRec.cols() != width || w.b.size() != width) {
            throw Error { ErrorKind::shape, "network: weight shapes do not match the cell" };
        }
        if (!diagonalIsZero(w.wRec)) {
            throw Error { ErrorKind::state, "network: recurrent diagonal must be zero" };
        }
        if (!allFinite(w.wIn) || !allFinite(w.wRec) || !allFinite(w.b)) {
            throw Error { ErrorKind::numeric, "network: non-finite weights" };
        }
    }
    if (readout.w.rows() != layers.back().cfg.nRec || readout.b.size() != readout.w.cols()
        || readout.w.cols() == 0) {
        throw Error { ErrorKind::shape, "network: readout shape mismatch" };
    }
    if (!allFinite(readout.w) || !allFinite(readout.b)) {
        throw Error { ErrorKind::numeric, "network: non-finite readout" };
    }
}

auto stackForward(const Network& net,
                  const Matrix& inputs,
                  bool record,
                  ForwardMode mode) -> ForwardResult
{
    net.validate();
    if (inputs.cols() != net.inputWidth()) {
        throw Error { ErrorKind::shape, "stackForward: input width mismatch" };
    }
    const std::size_t steps { inputs.rows() };
    const std::size_t depth { net.layers.size() };

    ForwardResult result;
    result.outputs = Matrix(steps, net.outputWidth());
    auto& tape { result.tape };
    tape.steps = steps;
    tape.mode = mode;
    tape.layers.resize(depth);

    std::vector<CellState> prev;
    std::vector<CellState> next;
    std::vector<std::vector<double>> drive;
    for (std::size_t l {}; l < depth; ++l) {
        const auto& cfg { net.layers[l].cfg };
        prev.push_back(CellState::zeros(cfg));
        next.push_back(CellState::zeros(cfg));
        drive.emplace_back(cfg.width());
        auto& lt { tape.layers[l] };
        lt.x = Matrix(steps, cfg.nRec);
        if (cfg.kind == CellKind::slstm) {
            lt.c = Matrix(steps, cfg.nRec);
        } else {
            lt.y = Matrix(steps, cfg.nRec);
        }
        if (record) {
            lt.z = Matrix(steps, cfg.nIn);
            if (cfg.kind == CellKind::slstm) {
                lt.pre = Matrix(steps, cfg.width());
            } else {
                lt.thrEff = Matrix(steps, cfg.nRec);
                if (cfg.reset == ResetKind::multiplicative) {
                    lt.u = Matrix(steps, cfg.nRec);
                }
            }
        }
    }

    for (std::size_t t {}; t < steps; ++t) {
        std::span<const double> z { inputs.row(t) };
        for (std::size_t l {}; l < depth; ++l) {
            const auto& layer { net.layers[l] };
            auto& lt { tape.layers[l] };
            StepRecord rec;
            if (record) {
                std::copy(z.begin(), z.end(), lt.z.row(t).begin());
                if (!lt.thrEff.empty()) {
                    rec.thrEff = lt.thrEff.row(t);
                }
                if (!lt.u.empty()) {
                    rec.u = lt.u.row(t);
                }
                if (!lt.pre.empty()) {
                    rec.pre = lt.pre.row(t);
                }
            }
            try {
                advance(layer.cfg, layer.w, mode, prev[l], z, next[l], drive[l], rec);
            } catch (const Error& e) {
                std::ostringstream msg;
                msg << e.what() << " at layer " << l << ", step " << t;
                throw Error { e.kind(), msg.str() };
            }
            std::swap(prev[l], next[l]);
            const auto& now { prev[l] };
            std::copy(now.x.begin(), now.x.end(), lt.x.row(t).begin());
            if (layer.cfg.kind == CellKind::slstm) {
                std::copy(now.c.begin(), now.c.end(), lt.c.row(t).begin());
            } else {
                std::copy(now.y.begin(), now.y.end(), lt.y.row(t).begin());
            }
            z = lt.x.row(t);
        }
        auto out { result.outputs.row(t) };
        std::copy(net.readout.b.begin(), net.readout.b.end(), out.begin());
        accumulateRows(z, net.readout.w, out);
    }
    tape.complete = record;
    return result;
}

} // namespace sgkit
