#pragma once

#include <map>
#include <string>
#include <vector>

#include "s2st/core/graph.hpp"

namespace s2st::model {

/// Versioned binary container: magic, format version, the resolved run config
/// (JSON), then named parameter tensors. Loading validates magic/version and
/// shapes; mismatches raise CheckpointError.
void save_checkpoint(const std::string& path, const std::vector<ad::Param*>& params,
                     const std::string& config_json);

struct LoadedCheckpoint {
  std::string config_json;
  std::map<std::string, Array> params;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

/// Copies loaded tensors into the given params by name; every param must be
/// present with the exact shape.
void restore_params(const LoadedCheckpoint& ckpt, const std::vector<ad::Param*>& params);

}  // namespace s2st::model
