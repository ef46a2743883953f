#ifndef W2L_CHECKPOINT_HPP
#define W2L_CHECKPOINT_HPP

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>

#include "w2l/nn.hpp"

namespace w2l::nn {

/// Named parameter stores plus free-form metadata.
///
/// On disk: the 8-byte magic "W2LCKPT1", a little-endian u64 header length,
/// a JSON header ({"metadata": ..., "tensors": [{"store", "name", "shape",
/// "offset"}]}), then the raw float64 payload in header order. Values are
/// written bit-for-bit, so a load after save reproduces every parameter
/// exactly.
struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::map<std::string, ParameterStore> stores;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace w2l::nn

#endif  // W2L_CHECKPOINT_HPP
