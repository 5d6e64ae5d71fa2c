#pragma once

#include <string>

#include "poselift/neuralnet.hpp"

namespace poselift {

// JSON model container: format_version, config (dims, max_norm), and the op
// list with tensors as shape + row-major flat arrays. Serialization is
// byte-stable: identical models produce identical files.
void save_model(const MlpModel& m, const std::string& path);
MlpModel load_model(const std::string& path);

// Stable content hash of all parameters (FNV-1a over the serialized bytes);
// handy for frozen-weights assertions.
uint64_t model_hash(const MlpModel& m);

}  // namespace poselift
