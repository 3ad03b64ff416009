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

#pragma once

// Helpers shared by the test binaries.

#include "sgkit/cells.hpp"
#include "sgkit/numkit.hpp"

#include <vector>

namespace sgkit::testing {

inline auto randomMatrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) -> Matrix
{
    return Matrix(rows, cols, sample(rng, NormalDist { 0.0, scale * scale }, rows * cols));
}

inline auto randomVector(Rng& rng, std::size_t n, double scale) -> std::vector<double>
{
    return sample(rng, NormalDist { 0.0, scale * scale }, n);
}

inline auto binaryInputs(Rng& rng, std::size_t steps, std::size_t channels, double rate)
  -> Matrix
{
    Matrix m(steps, channels);
    for (double& v : m.values()) {
        v = rng.uniform01() < rate ? 1.0 : 0.0;
    }
    return m;
}

// A stack of identical cells with Gaussian weights and a random readout.
inline auto randomNetwork(Rng& rng,
                          CellKind kind,
                          std::vector<std::size_t> widths, // n_in, n_1, ..., n_L
                          std::size_t outputs,
                          double scale,
                          ResetKind reset = ResetKind::subtractive,
                          SurrogateSpec surrogate = {}) -> Network
{
    Network net;
    for (std::size_t l { 1 }; l < widths.size(); ++l) {
        auto cfg { CellConfig::uniform(kind, widths[l - 1], widths[l], 0.3 + 0.6 * rng.uniform01(),
                                       0.5 + rng.uniform01()) };
        cfg.reset = reset;
        cfg.surrogate = surrogate;
        if (kind == CellKind::alif) {
            cfg.rho = 0.8;
            cfg.beta = 0.3;
        }
        WeightSet w { randomMatrix(rng, cfg.nIn, cfg.width(), scale),
                      randomMatrix(rng, cfg.nRec, cfg.width(), scale),
                      randomVector(rng, cfg.width(), scale) };
        maskDiagonal(w.wRec);
        net.layers.push_back({ std::move(cfg), std::move(w) });
    }
    net.readout = { randomMatrix(rng, widths.back(), outputs, scale),
                    randomVector(rng, outputs, scale) };
    return net;
}

} // namespace sgkit::testing
