#pragma once

#include <array>

#include "qkdsim/link.hpp"

namespace qkdsim::testing {

// Brute-force dense transfer-matrix model of the full chain, composed from
// raw 2x2 coupler/phase/Jones blocks in the (slot, port, polarisation)
// basis. Written independently of the sparse propagation code so the two
// can check each other.
std::array<std::array<double, 2>, 3> chain_oracle_probabilities(
    const link::LinkConfig& config, const devices::SwitchSetting& setting,
    const optics::JonesMatrix* rotation);

// Dense model of a single unbalanced MZI for inputs on `in_port`. Returns
// the expected output state (out and leak ports) for entrywise comparison
// against mzi_transfer.
optics::ModeState mzi_oracle_transfer(const devices::MziSpec& spec,
                                      const optics::ModeState& input, int in_port,
                                      int out0, int out1);

}  // namespace qkdsim::testing
