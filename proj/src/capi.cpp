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

#include "sgkit/error.hpp"
#include "sgkit/experiment.hpp"

#include <cstring>
#include <new>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>

struct sgkit_experiment
{
    sgkit::ExperimentConfig cfg;
};

namespace {

thread_local std::string lastError;

auto statusOf(sgkit::ErrorKind kind) -> sgkit_status
{
    using sgkit::ErrorKind;
    switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::shape:
    case ErrorKind::state:
        return SGKIT_ERR_USAGE;
    case ErrorKind::config:
    case ErrorKind::parse:
    case ErrorKind::format:
    case ErrorKind::parameter:
        return SGKIT_ERR_CONFIG;
    case ErrorKind::infeasible:
    case ErrorKind::domain:
        return SGKIT_ERR_INFEASIBLE;
    case ErrorKind::numeric:
    case ErrorKind::quadrature:
        return SGKIT_ERR_NUMERIC;
    case ErrorKind::io:
        return SGKIT_ERR_IO;
    }
    return SGKIT_ERR_INTERNAL;
}

auto fail(sgkit_status status, std::string message) -> sgkit_status
{
    lastError = std::move(message);
    return status;
}

// Runs fn, translating exceptions into a status and the thread's message.
template <class Fn>
auto guarded(Fn&& fn) -> sgkit_status
{
    try {
        return fn();
    } catch (const sgkit::Error& e) {
        return fail(statusOf(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(SGKIT_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SGKIT_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SGKIT_ERR_INTERNAL, "unknown error");
    }
}

auto copyOut(const std::string& text, char* buf, std::size_t cap, std::size_t* needed)
  -> sgkit_status
{
    if (needed != nullptr) {
        *needed = text.size();
    }
    if (cap > 0) {
        if (buf == nullptr) {
            return fail(SGKIT_ERR_USAGE, "null buffer with nonzero capacity");
        }
        const std::size_t n { std::min(cap - 1, text.size()) };
        std::memcpy(buf, text.data(), n);
        buf[n] = '\0';
    }
    return SGKIT_OK;
}

// Forwards stream output to a C callback.
class SinkBuf : public std::stringbuf
{
public:
    SinkBuf(sgkit_sink sink, void* user) : sink_ { sink }, user_ { user } {}

    auto sync() -> int override
    {
        const auto text { str() };
        if (sink_ != nullptr && !text.empty()) {
            sink_(user_, text.data(), text.size());
        }
        str({});
        return 0;
    }

private:
    sgkit_sink sink_;
    void* user_;
};

} // namespace

extern "C" {

const char* sgkit_version(void)
{
    return "1.0.0";
}

const char* sgkit_last_error(void)
{
    return lastError.c_str();
}

const char* sgkit_status_name(sgkit_status status)
{
    switch (status) {
    case SGKIT_OK:
        return "ok";
    case SGKIT_ERR_USAGE:
        return "usage";
    case SGKIT_ERR_CONFIG:
        return "config";
    case SGKIT_ERR_INFEASIBLE:
        return "infeasible";
    case SGKIT_ERR_NUMERIC:
        return "numeric";
    case SGKIT_ERR_IO:
        return "io";
    case SGKIT_ERR_INTERNAL:
        return "internal";
    }
    return "unknown";
}

sgkit_status sgkit_experiment_new(sgkit_experiment** out)
{
    if (out == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null output handle");
    }
    return guarded([&] {
        *out = new sgkit_experiment {};
        return SGKIT_OK;
    });
}

sgkit_status sgkit_experiment_load(const char* path, sgkit_experiment** out)
{
    if (path == nullptr || out == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    return guarded([&] {
        *out = new sgkit_experiment { sgkit::loadConfig(path) };
        return SGKIT_OK;
    });
}

sgkit_status sgkit_experiment_parse(const char* text, sgkit_experiment** out)
{
    if (text == nullptr || out == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    return guarded([&] {
        *out = new sgkit_experiment { sgkit::parseConfig(text) };
        return SGKIT_OK;
    });
}

void sgkit_experiment_free(sgkit_experiment* exp)
{
    delete exp;
}

sgkit_status sgkit_experiment_set(sgkit_experiment* exp, const char* key, const char* value)
{
    if (exp == nullptr || key == nullptr || value == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    return guarded([&] {
        exp->cfg.set(key, value);
        return SGKIT_OK;
    });
}

sgkit_status sgkit_experiment_get(const sgkit_experiment* exp,
                                  const char* key,
                                  char* buf,
                                  size_t cap,
                                  size_t* needed)
{
    if (exp == nullptr || key == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    return guarded([&] { return copyOut(exp->cfg.get(key), buf, cap, needed); });
}

sgkit_status sgkit_experiment_echo(const sgkit_experiment* exp,
                                   char* buf,
                                   size_t cap,
                                   size_t* needed)
{
    if (exp == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    return guarded([&] { return copyOut(sgkit::echoConfig(exp->cfg), buf, cap, needed); });
}

sgkit_status sgkit_experiment_validate(const sgkit_experiment* exp)
{
    if (exp == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    return guarded([&] {
        exp->cfg.validate();
        return SGKIT_OK;
    });
}

sgkit_status sgkit_run(const sgkit_experiment* exp,
                       const char* command,
                       size_t threads,
                       sgkit_sink sink,
                       void* user)
{
    if (exp == nullptr || command == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    SinkBuf buf { sink, user };
    std::ostream out { &buf };
    const auto status { guarded([&] {
        const std::string_view cmd { command };
        const auto& cfg { exp->cfg };
        if (cmd == "init-solve") {
            if (!sgkit::runInitSolve(cfg, out)) {
                out.flush();
                return fail(SGKIT_ERR_INFEASIBLE, "init-solve: infeasible layer, see report");
            }
        } else if (cmd == "train") {
            sgkit::runTrain(cfg, out);
        } else if (cmd == "sweep") {
            const std::size_t n { threads > 0 ? threads
                                              : std::max(1u, std::thread::hardware_concurrency()) };
            sgkit::runSweep(cfg, out, n);
        } else if (cmd == "probe") {
            sgkit::runProbe(cfg, out);
        } else if (cmd == "encode") {
            sgkit::runEncode(cfg, out);
        } else {
            return fail(SGKIT_ERR_USAGE, "unknown command '" + std::string { cmd } + "'");
        }
        return SGKIT_OK;
    }) };
    out.flush();
    return status;
}

sgkit_status sgkit_surrogate(const char* shape,
                             double gamma,
                             double sharpness,
                             double q,
                             double v,
                             double* out)
{
    if (shape == nullptr || out == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    return guarded([&] {
        const auto kind { sgkit::parseSurrogateShape(shape) };
        if (!kind) {
            return fail(SGKIT_ERR_CONFIG, "unknown surrogate shape '" + std::string { shape } + "'");
        }
        const sgkit::SurrogateSpec spec { *kind, gamma, sharpness, q };
        spec.validate();
        *out = sgkit::pseudoDerivative(spec, v);
        return SGKIT_OK;
    });
}

sgkit_status sgkit_latency(double x, double theta, double tau, double* time, int* fired)
{
    if (time == nullptr || fired == nullptr) {
        return fail(SGKIT_ERR_USAGE, "null argument");
    }
    return guarded([&] {
        const auto t { sgkit::latencyEncode(x, theta, tau) };
        *fired = t ? 1 : 0;
        *time = t.value_or(0.0);
        return SGKIT_OK;
    });
}

} // extern "C"
