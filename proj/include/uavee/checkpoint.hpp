// Versioned JSON checkpoints for a learning agent. Doubles are written in
// shortest round-trip form, so save/load restores parameters bit for bit.
#pragma once

#include "uavee/ddqn.hpp"

#include <filesystem>
#include <string>

namespace uavee {

inline constexpr int kCheckpointVersion = 1;

struct AgentCheckpoint {
  std::string agent_kind;  // "cmad" or "mad"
  int uav_id = 0;
  DdqnAgent agent;
};

void save_checkpoint(const std::filesystem::path& path, const DdqnAgent& agent,
                     const std::string& agent_kind, int uav_id);

/// The replay memory is not persisted; the restored agent starts with an
/// empty buffer of the stored capacity.
AgentCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace uavee
