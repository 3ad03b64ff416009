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

#include "sgkit/data.hpp"

#include "sgkit/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace sgkit {

auto SpikeSequence::dense() const -> Matrix
{
    Matrix m(steps, channels);
    for (const auto& e : events) {
        m(e.t, e.channel) = 1.0;
    }
    return m;
}

auto Dataset::classCount() const -> std::size_t
{
    std::size_t top {};
    for (const auto& s : samples) {
        top = std::max(top, s.label + 1);
    }
    return top;
}

auto datasetStats(const Dataset& data) -> DatasetStats
{
    const double cells { static_cast<double>(data.samples.size())
                         * static_cast<double>(data.steps)
                         * static_cast<double>(data.channels) };
    if (!(cells > 0.0)) {
        throw Error { ErrorKind::domain, "datasetStats: empty dataset" };
    }
    double ones {};
    for (const auto& s : data.samples) {
        ones += static_cast<double>(s.events.size());
    }
    // Entries are binary, so the second moment equals the mean.
    const double mean { ones / cells };
    return { mean, mean - mean * mean };
}

auto latencyEncode(double x, double theta, double tau, std::size_t* clipped)
  -> std::optional<double>
{
    if (!(theta > 0.0 && theta < 1.0) || !(tau > 0.0)) {
        throw Error { ErrorKind::parameter, "latencyEncode: needs 0 < theta < 1 and tau > 0" };
    }
    if (x < 0.0 || x > 1.0) {
        x = std::clamp(x, 0.0, 1.0);
        if (clipped != nullptr) {
            ++*clipped;
        }
    }
    if (!(x > theta)) {
        return std::nullopt;
    }
    return tau * std::log(x / (x - theta));
}

auto encodeImage(std::span<const double> pixels,
                 std::size_t label,
                 const LatencyParams& params,
                 std::size_t* clipped) -> SpikeSequence
{
    if (!(params.dt > 0.0) || params.steps == 0) {
        throw Error { ErrorKind::parameter, "encodeImage: needs dt > 0 and steps > 0" };
    }
    SpikeSequence seq { params.steps, pixels.size(), {}, label };
    for (std::size_t ch {}; ch < pixels.size(); ++ch) {
        const auto time { latencyEncode(pixels[ch], params.theta, params.tau, clipped) };
        if (!time) {
            continue;
        }
        const double bin { std::floor(*time / params.dt) };
        if (bin < static_cast<double>(params.steps)) {
            seq.events.push_back({ static_cast<std::uint32_t>(bin),
                                   static_cast<std::uint32_t>(ch) });
        }
    }
    std::stable_sort(seq.events.begin(), seq.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    return seq;
}

auto synthTemplates(Rng& rng, const SynthConfig& cfg) -> Matrix
{
    if (cfg.classes < 1 || cfg.channels < 1) {
        throw Error { ErrorKind::parameter, "synthTemplates: needs classes and channels" };
    }
    for (const double r : { cfg.baseRate, cfg.activeRate }) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw Error { ErrorKind::parameter, "synthTemplates: rates must lie in [0, 1]" };
        }
    }
    if (!(cfg.activeFraction >= 0.0 && cfg.activeFraction <= 1.0)) {
        throw Error { ErrorKind::parameter, "synthTemplates: active fraction must lie in [0, 1]" };
    }
    const auto active { static_cast<std::size_t>(
      std::lround(cfg.activeFraction * static_cast<double>(cfg.channels))) };
    Matrix templates(cfg.classes, cfg.channels, cfg.baseRate);
    std::vector<std::size_t> order(cfg.channels);
    for (std::size_t k {}; k < cfg.classes; ++k) {
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        // Partial Fisher-Yates over our own generator keeps this portable.
        for (std::size_t i {}; i < active; ++i) {
            const std::size_t j { i + rng.next() % (cfg.channels - i) };
            std::swap(order[i], order[j]);
            templates(k, order[i]) = cfg.activeRate;
        }
    }
    return templates;
}

auto synthTask(Rng& rng, const Matrix& templates, std::size_t steps, std::size_t count)
  -> Dataset
{
    const std::size_t classes { templates.rows() };
    const std::size_t channels { templates.cols() };
    if (classes == 0 || channels == 0 || steps == 0) {
        throw Error { ErrorKind::parameter, "synthTask: empty templates or window" };
    }
    Dataset data { channels, steps, {} };
    data.samples.reserve(count);
    for (std::size_t i {}; i < count; ++i) {
        SpikeSequence seq { steps, channels, {}, i % classes };
        for (std::size_t t {}; t < steps; ++t) {
            for (std::size_t ch {}; ch < channels; ++ch) {
                if (rng.uniform01() < templates(seq.label, ch)) {
                    seq.events.push_back({ static_cast<std::uint32_t>(t),
                                           static_cast<std::uint32_t>(ch) });
                }
            }
        }
        data.samples.push_back(std::move(seq));
    }
    for (std::size_t i { count }; i > 1; --i) {
        std::swap(data.samples[i - 1], data.samples[rng.next() % i]);
    }
    return data;
}

auto bayesPredict(const Matrix& templates, const SpikeSequence& seq) -> std::size_t
{
    if (seq.channels != templates.cols()) {
        throw Error { ErrorKind::shape, "bayesPredict: channel count mismatch" };
    }
    std::vector<double> counts(seq.channels, 0.0);
    for (const auto& e : seq.events) {
        counts[e.channel] += 1.0;
    }
    const double steps { static_cast<double>(seq.steps) };
    std::size_t best {};
    double bestScore { -std::numeric_limits<double>::infinity() };
    for (std::size_t k {}; k < templates.rows(); ++k) {
        double score {};
        for (std::size_t ch {}; ch < seq.channels; ++ch) {
            const double r { templates(k, ch) };
            const double on { counts[ch] };
            const double off { steps - on };
            score += on > 0.0 ? on * std::log(r) : 0.0;
            score += off > 0.0 ? off * std::log1p(-r) : 0.0;
        }
        if (score > bestScore) {
            bestScore = score;
            best = k;
        }
    }
    return best;
}

auto bayesAccuracy(Rng& rng, const Matrix& templates, std::size_t steps, std::size_t draws)
  -> double
{
    if (draws == 0) {
        throw Error { ErrorKind::parameter, "bayesAccuracy: needs draws > 0" };
    }
    const auto data { synthTask(rng, templates, steps, draws) };
    std::size_t hits {};
    for (const auto& s : data.samples) {
        hits += bayesPredict(templates, s) == s.label ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(draws);
}

auto writeEvents(std::ostream& out, const Dataset& data) -> void
{
    out << "#channels=" << data.channels << " #T=" << data.steps
        << " #samples=" << data.samples.size() << '\n';
    for (const auto& s : data.samples) {
        out << "label " << s.label << '\n';
        for (const auto& e : s.events) {
            out << e.t << ' ' << e.channel << '\n';
        }
        out << '\n';
    }
}

namespace {

auto parseError(std::size_t line, std::string_view what) -> Error
{
    std::ostringstream msg;
    msg << "event file line " << line << ": " << what;
    return Error { ErrorKind::parse, msg.str() };
}

auto formatError(std::size_t line, std::string_view what) -> Error
{
    std::ostringstream msg;
    msg << "event file line " << line << ": " << what;
    return Error { ErrorKind::format, msg.str() };
}

// Parses an unsigned integer spanning the whole of text.
auto parseCount(std::string_view text) -> std::optional<std::size_t>
{
    std::size_t value {};
    const auto* end { text.data() + text.size() };
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc {} || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return value;
}

auto headerField(std::string_view token, std::string_view key) -> std::optional<std::size_t>
{
    if (token.substr(0, key.size()) != key) {
        return std::nullopt;
    }
    return parseCount(token.substr(key.size()));
}

} // namespace

auto readEvents(std::istream& in) -> Dataset
{
    std::string line;
    std::size_t lineNo { 1 };
    if (!std::getline(in, line)) {
        throw parseError(lineNo, "missing header");
    }
    Dataset data;
    std::size_t declared {};
    {
        std::istringstream header { line };
        std::string a;
        std::string b;
        std::string c;
        std::string extra;
        header >> a >> b >> c;
        const auto channels { headerField(a, "#channels=") };
        const auto steps { headerField(b, "#T=") };
        const auto samples { headerField(c, "#samples=") };
        if (!channels || !steps || !samples || (header >> extra)) {
            throw parseError(lineNo, "header must read '#channels=<n> #T=<steps> #samples=<m>'");
        }
        data.channels = *channels;
        data.steps = *steps;
        declared = *samples;
    }

    std::optional<SpikeSequence> current;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) {
            if (current) {
                data.samples.push_back(std::move(*current));
                current.reset();
            }
            continue;
        }
        const std::string_view text { line };
        if (text.substr(0, 6) == "label ") {
            if (current) {
                throw formatError(lineNo, "sample not terminated by a blank line");
            }
            const auto label { parseCount(text.substr(6)) };
            if (!label) {
                throw parseError(lineNo, "malformed label line");
            }
            current = SpikeSequence { data.steps, data.channels, {}, *label };
            continue;
        }
        const auto space { text.find(' ') };
        if (space == std::string_view::npos) {
            throw parseError(lineNo, "expected '<t> <channel>'");
        }
        const auto t { parseCount(text.substr(0, space)) };
        const auto ch { parseCount(text.substr(space + 1)) };
        if (!t || !ch) {
            throw parseError(lineNo, "expected '<t> <channel>'");
        }
        if (!current) {
            throw formatError(lineNo, "event outside of a sample");
        }
        if (*t >= data.steps) {
            throw formatError(lineNo, "event time outside the window");
        }
        if (*ch >= data.channels) {
            throw formatError(lineNo, "channel id exceeds the header channel count");
        }
        if (!current->events.empty() && current->events.back().t > *t) {
            throw formatError(lineNo, "event times must be non-decreasing within a sample");
        }
        current->events.push_back(
          { static_cast<std::uint32_t>(*t), static_cast<std::uint32_t>(*ch) });
    }
    if (current) {
        data.samples.push_back(std::move(*current));
    }
    if (data.samples.size() != declared) {
        std::ostringstream msg;
        msg << "header declares " << declared << " samples but " << data.samples.size()
            << " were found";
        throw formatError(lineNo, msg.str());
    }
    return data;
}

auto writeEventFile(const std::filesystem::path& path, const Dataset& data) -> void
{
    std::ofstream out { path, std::ios::binary };
    if (!out) {
        throw Error { ErrorKind::io, "cannot open " + path.string() + " for writing" };
    }
    writeEvents(out, data);
    if (!out) {
        throw Error { ErrorKind::io, "failed writing " + path.string() };
    }
}

auto readEventFile(const std::filesystem::path& path) -> Dataset
{
    std::ifstream in { path, std::ios::binary };
    if (!in) {
        throw Error { ErrorKind::io, "cannot open " + path.string() };
    }
    return readEvents(in);
}

namespace {

auto readBigEndian(std::istream& in) -> std::uint32_t
{
    unsigned char b[4] {};
    in.read(reinterpret_cast<char*>(b), 4);
    return (std::uint32_t { b[0] } << 24) | (std::uint32_t { b[1] } << 16)
           | (std::uint32_t { b[2] } << 8) | std::uint32_t { b[3] };
}

auto openIdx(const std::filesystem::path& path, std::uint32_t magic) -> std::ifstream
{
    std::ifstream in { path, std::ios::binary };
    if (!in) {
        throw Error { ErrorKind::io, "cannot open " + path.string() };
    }
    if (readBigEndian(in) != magic || !in) {
        throw Error { ErrorKind::format, path.string() + ": unexpected IDX magic number" };
    }
    return in;
}

} // namespace

auto readIdxImages(const std::filesystem::path& path) -> IdxImages
{
    auto in { openIdx(path, 0x00000803) };
    IdxImages images;
    images.count = readBigEndian(in);
    images.rows = readBigEndian(in);
    images.cols = readBigEndian(in);
    images.pixels.resize(images.count * images.rows * images.cols);
    in.read(reinterpret_cast<char*>(images.pixels.data()),
            static_cast<std::streamsize>(images.pixels.size()));
    if (!in) {
        throw Error { ErrorKind::format, path.string() + ": truncated IDX image file" };
    }
    return images;
}

auto readIdxLabels(const std::filesystem::path& path) -> std::vector<std::uint8_t>
{
    auto in { openIdx(path, 0x00000801) };
    std::vector<std::uint8_t> labels(readBigEndian(in));
    in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
    if (!in) {
        throw Error { ErrorKind::format, path.string() + ": truncated IDX label file" };
    }
    return labels;
}

auto encodeIdx(const IdxImages& images,
               std::span<const std::uint8_t> labels,
               std::span<const std::size_t> indices,
               const LatencyParams& params) -> Dataset
{
    if (labels.size() != images.count) {
        throw Error { ErrorKind::format, "encodeIdx: image and label counts differ" };
    }
    const std::size_t pixels { images.rows * images.cols };
    Dataset data { pixels, params.steps, {} };
    std::vector<double> scaled(pixels);
    for (const std::size_t index : indices) {
        if (index >= images.count) {
            throw Error { ErrorKind::domain, "encodeIdx: image index out of range" };
        }
        for (std::size_t p {}; p < pixels; ++p) {
            scaled[p] = images.pixels[index * pixels + p] / 255.0;
        }
        data.samples.push_back(encodeImage(scaled, labels[index], params));
    }
    return data;
}

} // namespace sgkit
