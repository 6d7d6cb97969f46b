#pragma once

#include <cstdint>
#include <string>

#include "irsbf/channel.hpp"
#include "irsbf/cone_problem.hpp"
#include "irsbf/scenario.hpp"

namespace irsbf {

/// JSON channel dump. Complex numbers are [re, im] pairs; matrices are row-major lists
/// of rows. The document carries the config hash and drop seed for replay.
std::string dump_channels(const ChannelSet& ch, const ScenarioConfig& config, std::uint64_t seed);

struct ChannelDump {
  ChannelSet channels;
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Throws std::runtime_error on malformed input.
ChannelDump load_channels(const std::string& text);

/// JSON dump of a cone problem with keys Q, v, offset, balls, box and socs, in the same
/// complex-number convention as dump_channels.
std::string dump_cone_problem(const ConeProblem& problem);
ConeProblem load_cone_problem(const std::string& text);

}  // namespace irsbf
