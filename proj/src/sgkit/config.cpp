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

#include "sgkit/config.hpp"

#include "sgkit/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace sgkit {

auto toString(TaskKind kind) -> std::string_view
{
    switch (kind) {
    case TaskKind::synth:
        return "synth";
    case TaskKind::slMnist:
        return "sl-mnist";
    case TaskKind::events:
        return "events";
    }
    return "unknown";
}

auto parseTaskKind(std::string_view name) -> std::optional<TaskKind>
{
    for (const auto kind : { TaskKind::synth, TaskKind::slMnist, TaskKind::events }) {
        if (toString(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

auto toString(InitMode mode) -> std::string_view
{
    return mode == InitMode::scheme ? "scheme" : "conditioned";
}

auto parseInitMode(std::string_view name) -> std::optional<InitMode>
{
    if (name == "scheme") {
        return InitMode::scheme;
    }
    if (name == "conditioned") {
        return InitMode::conditioned;
    }
    return std::nullopt;
}

namespace {

template <typename T>
auto pick(const std::vector<T>& values, std::size_t layer) -> T
{
    return values.size() == 1 ? values.front() : values.at(layer);
}

} // namespace

auto ModelConfig::widthOf(std::size_t layer) const -> std::size_t
{
    return pick(nRec, layer);
}

auto ModelConfig::alphaOf(std::size_t layer) const -> double
{
    return pick(alpha, layer);
}

auto ModelConfig::thrOf(std::size_t layer) const -> double
{
    return pick(thr, layer);
}

namespace {

auto badValue(std::string_view key, std::string_view value, std::string_view expected) -> Error
{
    return Error { ErrorKind::config, "config: " + std::string { key } + "=" + std::string { value }
                                        + ": expected " + std::string { expected } };
}

auto trim(std::string_view s) -> std::string_view
{
    const auto first { s.find_first_not_of(" \t\r") };
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last { s.find_last_not_of(" \t\r") };
    return s.substr(first, last - first + 1);
}

auto formatDouble(double v) -> std::string
{
    char buf[64];
    const auto res { std::to_chars(buf, buf + sizeof buf, v) };
    return { buf, res.ptr };
}

auto toDouble(std::string_view key, std::string_view text) -> double
{
    double v {};
    const auto res { std::from_chars(text.data(), text.data() + text.size(), v) };
    if (res.ec != std::errc {} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw badValue(key, text, "a finite number");
    }
    return v;
}

auto toUnsigned(std::string_view key, std::string_view text) -> std::uint64_t
{
    std::uint64_t v {};
    const auto res { std::from_chars(text.data(), text.data() + text.size(), v) };
    if (res.ec != std::errc {} || res.ptr != text.data() + text.size()) {
        throw badValue(key, text, "a non-negative integer");
    }
    return v;
}

auto toBool(std::string_view key, std::string_view text) -> bool
{
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw badValue(key, text, "true or false");
}

auto splitList(std::string_view text) -> std::vector<std::string_view>
{
    std::vector<std::string_view> parts;
    std::size_t start {};
    while (true) {
        const auto comma { text.find(',', start) };
        parts.push_back(trim(text.substr(start, comma == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : comma - start)));
        if (comma == std::string_view::npos) {
            return parts;
        }
        start = comma + 1;
    }
}

template <typename T, typename F>
auto joinList(const std::vector<T>& values, F&& format) -> std::string
{
    std::string out;
    for (std::size_t i {}; i < values.size(); ++i) {
        out += (i ? "," : "");
        out += format(values[i]);
    }
    return out;
}

template <typename Parse>
auto toEnum(std::string_view key, std::string_view text, Parse&& parse, std::string_view expected)
{
    const auto v { parse(text) };
    if (!v) {
        throw badValue(key, text, expected);
    }
    return *v;
}

auto forwardModeName(ForwardMode mode) -> std::string
{
    return mode == ForwardMode::soft ? "soft" : "spiking";
}

struct Field
{
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, std::string_view key, std::string_view)> set;
};

template <typename Access>
auto real(std::string key, Access access) -> Field
{
    return { std::move(key),
             [access](const ExperimentConfig& c) {
                 return formatDouble(access(c));
             },
             [access](ExperimentConfig& c, std::string_view k, std::string_view v) {
                 access(c) = toDouble(k, v);
             } };
}

template <typename Access>
auto count(std::string key, Access access) -> Field
{
    return { std::move(key),
             [access](const ExperimentConfig& c) {
                 return std::to_string(access(c));
             },
             [access](ExperimentConfig& c, std::string_view k, std::string_view v) {
                 using T = std::remove_reference_t<decltype(access(c))>;
                 access(c) = static_cast<T>(toUnsigned(k, v));
             } };
}

template <typename Access>
auto text(std::string key, Access access) -> Field
{
    return { std::move(key),
             [access](const ExperimentConfig& c) {
                 return access(c);
             },
             [access](ExperimentConfig& c, std::string_view, std::string_view v) {
                 access(c) = std::string { v };
             } };
}

template <typename Access>
auto flag(std::string key, Access access) -> Field
{
    return { std::move(key),
             [access](const ExperimentConfig& c) {
                 return std::string { access(c) ? "true" : "false" };
             },
             [access](ExperimentConfig& c, std::string_view k, std::string_view v) {
                 access(c) = toBool(k, v);
             } };
}

template <typename Access, typename Parse>
auto choice(std::string key, Access access, Parse parse, std::string expected) -> Field
{
    return { std::move(key),
             [access](const ExperimentConfig& c) {
                 return std::string { toString(access(c)) };
             },
             [access, parse, expected](ExperimentConfig& c, std::string_view k, std::string_view v) {
                 access(c) = toEnum(k, v, parse, expected);
             } };
}

auto fields() -> const std::vector<Field>&
{
    using C = ExperimentConfig;
    static const std::vector<Field> table {
        count("seed", [](auto& c) -> auto& { return c.seed; }),
        text("output_dir", [](auto& c) -> auto& { return c.outputDir; }),

        choice("task.kind", [](auto& c) -> auto& { return c.task.kind; }, parseTaskKind,
               "synth, sl-mnist or events"),
        count("task.seed", [](auto& c) -> auto& { return c.task.seed; }),
        count("task.classes", [](auto& c) -> auto& { return c.task.synth.classes; }),
        count("task.channels", [](auto& c) -> auto& { return c.task.synth.channels; }),
        count("task.steps", [](auto& c) -> auto& { return c.task.synth.steps; }),
        real("task.base_rate", [](auto& c) -> auto& { return c.task.synth.baseRate; }),
        real("task.active_rate", [](auto& c) -> auto& { return c.task.synth.activeRate; }),
        real("task.active_fraction", [](auto& c) -> auto& { return c.task.synth.activeFraction; }),
        count("task.train_size", [](auto& c) -> auto& { return c.task.trainSize; }),
        count("task.val_size", [](auto& c) -> auto& { return c.task.valSize; }),
        text("task.train_path", [](auto& c) -> auto& { return c.task.trainPath; }),
        text("task.val_path", [](auto& c) -> auto& { return c.task.valPath; }),
        text("task.images_path", [](auto& c) -> auto& { return c.task.imagesPath; }),
        text("task.labels_path", [](auto& c) -> auto& { return c.task.labelsPath; }),
        real("task.theta", [](auto& c) -> auto& { return c.task.latency.theta; }),
        real("task.tau", [](auto& c) -> auto& { return c.task.latency.tau; }),
        count("task.latency_steps", [](auto& c) -> auto& { return c.task.latency.steps; }),
        real("task.dt", [](auto& c) -> auto& { return c.task.latency.dt; }),

        choice("model.cell", [](auto& c) -> auto& { return c.model.cell; }, parseCellKind,
               "lif, alif or slstm"),
        count("model.layers", [](auto& c) -> auto& { return c.model.layers; }),
        { "model.n_rec",
          [](const C& c) {
              return joinList(c.model.nRec, [](std::size_t n) { return std::to_string(n); });
          },
          [](C& c, std::string_view k, std::string_view v) {
              std::vector<std::size_t> out;
              for (const auto part : splitList(v)) {
                  out.push_back(toUnsigned(k, part));
              }
              c.model.nRec = std::move(out);
          } },
        { "model.alpha",
          [](const C& c) { return joinList(c.model.alpha, formatDouble); },
          [](C& c, std::string_view k, std::string_view v) {
              std::vector<double> out;
              for (const auto part : splitList(v)) {
                  out.push_back(toDouble(k, part));
              }
              c.model.alpha = std::move(out);
          } },
        { "model.thr",
          [](const C& c) { return joinList(c.model.thr, formatDouble); },
          [](C& c, std::string_view k, std::string_view v) {
              std::vector<double> out;
              for (const auto part : splitList(v)) {
                  out.push_back(toDouble(k, part));
              }
              c.model.thr = std::move(out);
          } },
        choice("model.reset", [](auto& c) -> auto& { return c.model.reset; }, parseResetKind,
               "subtractive or multiplicative"),
        real("model.rho", [](auto& c) -> auto& { return c.model.rho; }),
        real("model.beta", [](auto& c) -> auto& { return c.model.beta; }),

        choice("surrogate.shape", [](auto& c) -> auto& { return c.surrogate.shape; },
               parseSurrogateShape, "a surrogate shape name"),
        real("surrogate.gamma", [](auto& c) -> auto& { return c.surrogate.gamma; }),
        real("surrogate.sharpness", [](auto& c) -> auto& { return c.surrogate.sharpness; }),
        real("surrogate.q", [](auto& c) -> auto& { return c.surrogate.q; }),

        choice("init.mode", [](auto& c) -> auto& { return c.init.mode; }, parseInitMode,
               "scheme or conditioned"),
        choice("init.rule", [](auto& c) -> auto& { return c.init.rule; }, parseVarianceRule,
               "glorot, he, orthogonal, legacy-uniform or legacy-normal"),
        choice("init.distribution", [](auto& c) -> auto& { return c.init.distribution; },
               parseWeightDistribution, "uniform, normal or bigamma"),
        { "init.mask",
          [](const C& c) { return c.init.mask.toString(); },
          [](C& c, std::string_view, std::string_view v) { c.init.mask = ConditionMask::parse(v); } },
        choice("init.bounds", [](auto& c) -> auto& { return c.init.bounds; }, parseBoundsMode,
               "ensemble or per-sample"),
        choice("init.w_rec_distribution", [](auto& c) -> auto& { return c.init.wRecDistribution; },
               parseWeightDistribution, "uniform, normal or bigamma"),

        real("train.lr", [](auto& c) -> auto& { return c.train.lr; }),
        real("train.label_smoothing", [](auto& c) -> auto& { return c.train.labelSmoothing; }),
        real("train.clip_norm", [](auto& c) -> auto& { return c.train.clipNorm; }),
        real("train.weight_decay", [](auto& c) -> auto& { return c.train.weightDecay; }),
        count("train.epochs", [](auto& c) -> auto& { return c.train.epochs; }),
        count("train.batch_size", [](auto& c) -> auto& { return c.train.batchSize; }),
        flag("train.tail_average", [](auto& c) -> auto& { return c.train.tailAverage; }),
        choice("train.optimizer", [](auto& c) -> auto& { return c.train.optimizer; },
               parseOptimizerKind, "adabelief or adam"),
        real("train.beta1", [](auto& c) -> auto& { return c.train.beta1; }),
        real("train.beta2", [](auto& c) -> auto& { return c.train.beta2; }),
        real("train.eps", [](auto& c) -> auto& { return c.train.eps; }),
        { "train.mode",
          [](const C& c) { return forwardModeName(c.train.mode); },
          [](C& c, std::string_view k, std::string_view v) {
              if (v == "spiking") {
                  c.train.mode = ForwardMode::spiking;
              } else if (v == "soft") {
                  c.train.mode = ForwardMode::soft;
              } else {
                  throw badValue(k, v, "spiking or soft");
              }
          } },

        text("sweep.axis", [](auto& c) -> auto& { return c.sweep.axis; }),
        { "sweep.values",
          [](const C& c) { return joinList(c.sweep.values, [](const std::string& s) { return s; }); },
          [](C& c, std::string_view, std::string_view v) {
              std::vector<std::string> out;
              if (!v.empty()) {
                  for (const auto part : splitList(v)) {
                      out.emplace_back(part);
                  }
              }
              c.sweep.values = std::move(out);
          } },
        count("sweep.seeds", [](auto& c) -> auto& { return c.sweep.seeds; }),

        count("probe.steps", [](auto& c) -> auto& { return c.probe.steps; }),
        count("probe.samples", [](auto& c) -> auto& { return c.probe.samples; }),
    };
    return table;
}

auto findField(std::string_view key) -> const Field&
{
    for (const auto& f : fields()) {
        if (f.key == key) {
            return f;
        }
    }
    throw Error { ErrorKind::config, "config: unknown key '" + std::string { key } + "'" };
}

} // namespace

auto ExperimentConfig::set(std::string_view key, std::string_view value) -> void
{
    findField(key).set(*this, key, trim(value));
}

auto ExperimentConfig::get(std::string_view key) const -> std::string
{
    return findField(key).get(*this);
}

auto ExperimentConfig::operator==(const ExperimentConfig& other) const -> bool
{
    return echoConfig(*this) == echoConfig(other);
}

auto ExperimentConfig::validate() const -> void
{
    auto fail = [](const std::string& msg) { throw Error { ErrorKind::config, "config: " + msg }; };
    if (model.layers == 0) {
        fail("model.layers must be >= 1");
    }
    auto perLayer = [&](std::size_t size, const char* key) {
        if (size != 1 && size != model.layers) {
            fail(std::string { key } + " needs one value or one per layer");
        }
    };
    perLayer(model.nRec.size(), "model.n_rec");
    perLayer(model.alpha.size(), "model.alpha");
    perLayer(model.thr.size(), "model.thr");
    for (std::size_t l {}; l < model.layers; ++l) {
        if (model.widthOf(l) == 0) {
            fail("model.n_rec must be positive");
        }
        if (!(model.thrOf(l) > 0.0)) {
            fail("model.thr must be positive");
        }
        // alpha >= 1 is left to the solver, which reports divergent bounds.
        if (!(model.alphaOf(l) > 0.0)) {
            fail("model.alpha must be positive");
        }
    }
    try {
        surrogate.validate();
        train.validate();
    } catch (const Error& e) {
        fail(e.what());
    }
    if (task.kind == TaskKind::synth) {
        if (task.synth.classes < 2 || task.synth.channels == 0 || task.synth.steps == 0) {
            fail("synthetic task needs >= 2 classes, channels and steps");
        }
    }
    if (task.trainSize == 0 || task.valSize == 0) {
        fail("task.train_size and task.val_size must be positive");
    }
    if (!(task.latency.theta > 0.0 && task.latency.theta < 1.0) || !(task.latency.tau > 0.0)
        || !(task.latency.dt > 0.0) || task.latency.steps == 0) {
        fail("latency encoding needs 0 < theta < 1, tau > 0, dt > 0, steps > 0");
    }
    if (sweep.seeds == 0) {
        fail("sweep.seeds must be positive");
    }
    if (probe.samples == 0 || probe.steps == 0) {
        fail("probe.steps and probe.samples must be positive");
    }
}

auto configKeys() -> const std::vector<std::string>&
{
    static const std::vector<std::string> keys { [] {
        std::vector<std::string> out;
        for (const auto& f : fields()) {
            out.push_back(f.key);
        }
        return out;
    }() };
    return keys;
}

auto parseConfig(std::string_view text) -> ExperimentConfig
{
    ExperimentConfig cfg;
    std::size_t lineNo {};
    std::size_t start {};
    while (start <= text.size()) {
        const auto end { text.find('\n', start) };
        const auto line { trim(text.substr(start, end == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : end - start)) };
        ++lineNo;
        if (!line.empty() && line.front() != '#') {
            const auto eq { line.find('=') };
            if (eq == std::string_view::npos) {
                throw Error { ErrorKind::parse, "config line " + std::to_string(lineNo)
                                                  + ": expected key=value" };
            }
            try {
                cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
            } catch (const Error& e) {
                throw Error { e.kind(), "config line " + std::to_string(lineNo) + ": " + e.what() };
            }
        }
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    return cfg;
}

auto loadConfig(const std::filesystem::path& path) -> ExperimentConfig
{
    std::ifstream in { path };
    if (!in) {
        throw Error { ErrorKind::io, "cannot open config file " + path.string() };
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseConfig(buf.str());
}

auto applyOverrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) -> void
{
    for (const auto& item : overrides) {
        const auto eq { item.find('=') };
        if (eq == std::string::npos) {
            throw Error { ErrorKind::config, "override '" + item + "' is not key=value" };
        }
        cfg.set(trim(std::string_view { item }.substr(0, eq)),
                std::string_view { item }.substr(eq + 1));
    }
}

auto echoConfig(const ExperimentConfig& cfg) -> std::string
{
    std::string out;
    for (const auto& f : fields()) {
        out += f.key;
        out += '=';
        out += f.get(cfg);
        out += '\n';
    }
    return out;
}

} // namespace sgkit
