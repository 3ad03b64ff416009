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

#include "sgkit.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

namespace {

auto report(sgkit_status status) -> int
{
    std::fprintf(stderr, "sgkit: %s error: %s\n", sgkit_status_name(status), sgkit_last_error());
    return static_cast<int>(status);
}

// SGKIT_THREADS caps parallel sweep cells; unset or 0 means one per core.
auto threadCap(std::size_t& threads) -> bool
{
    const char* env { std::getenv("SGKIT_THREADS") };
    threads = 0;
    if (env == nullptr || *env == '\0') {
        return true;
    }
    try {
        std::size_t used {};
        const long long v { std::stoll(env, &used) };
        if (used != std::string { env }.size() || v < 0) {
            return false;
        }
        threads = static_cast<std::size_t>(v);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Spiking network initialization and surrogate gradient experiments", "sgkit" };
    app.set_version_flag("--version", sgkit_version());
    app.require_subcommand(1, 1);

    std::string configPath;
    std::vector<std::string> overrides;
    const std::vector<std::pair<const char*, const char*>> commands {
        { "init-solve", "solve the initialization conditions and report them" },
        { "train", "train one network and write its history and weights" },
        { "sweep", "train a grid of values along one axis over several seeds" },
        { "probe", "record forward and backward statistics at initialization" },
        { "encode", "write the task's train and validation sets as event files" },
    };
    for (const auto& [name, help] : commands) {
        auto* sub { app.add_subcommand(name, help) };
        sub->add_option("--config", configPath, "configuration file")->required();
        sub->add_option("--set", overrides, "override one key, key=value")
          ->allow_extra_args(false)
          ->take_all();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code { app.exit(e) };
        return code == 0 ? 0 : static_cast<int>(SGKIT_ERR_USAGE);
    }

    std::size_t threads {};
    if (!threadCap(threads)) {
        std::fprintf(stderr, "sgkit: SGKIT_THREADS must be a nonnegative integer\n");
        return static_cast<int>(SGKIT_ERR_USAGE);
    }

    sgkit_experiment* raw { nullptr };
    if (const auto s { sgkit_experiment_load(configPath.c_str(), &raw) }; s != SGKIT_OK) {
        return report(s);
    }
    const std::unique_ptr<sgkit_experiment, decltype(&sgkit_experiment_free)> exp {
        raw, &sgkit_experiment_free
    };
    for (const auto& item : overrides) {
        const auto eq { item.find('=') };
        if (eq == std::string::npos) {
            std::fprintf(stderr, "sgkit: --set expects key=value, got '%s'\n", item.c_str());
            return static_cast<int>(SGKIT_ERR_USAGE);
        }
        const auto key { item.substr(0, eq) };
        const auto value { item.substr(eq + 1) };
        if (const auto s { sgkit_experiment_set(exp.get(), key.c_str(), value.c_str()) };
            s != SGKIT_OK) {
            return report(s);
        }
    }

    const auto sink = [](void*, const char* data, std::size_t len) {
        std::fwrite(data, 1, len, stdout);
    };
    const auto* command { app.get_subcommands().front()->get_name().c_str() };
    const auto status { sgkit_run(exp.get(), command, threads, sink, nullptr) };
    std::fflush(stdout);
    return status == SGKIT_OK ? 0 : report(status);
}
