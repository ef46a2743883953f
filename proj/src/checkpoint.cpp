#include "w2l/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace w2l::nn {

namespace {

constexpr char kMagic[8] = {'W', '2', 'L', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written in native little-endian order");

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["metadata"] = ckpt.metadata;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [store_name, store] : ckpt.stores) {
    for (const auto& [name, e] : store) {
      header["tensors"].push_back({{"store", store_name},
                                   {"name", name},
                                   {"shape", {e.value.rows(), e.value.cols()}},
                                   {"offset", offset}});
      offset += static_cast<std::uint64_t>(e.value.size());
    }
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [store_name, store] : ckpt.stores) {
    for (const auto& [name, e] : store) {
      out.write(reinterpret_cast<const char*>(e.value.data()),
                static_cast<std::streamsize>(e.value.size() * sizeof(double)));
    }
  }
  if (!out) throw std::runtime_error("short write on checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path.string() + " is not a checkpoint");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("truncated checkpoint header in " + path.string());
  const nlohmann::json header = nlohmann::json::parse(text);

  const auto payload_start = in.tellg();
  Checkpoint ckpt;
  ckpt.metadata = header.at("metadata");
  for (const auto& t : header.at("tensors")) {
    const auto rows = t.at("shape").at(0).get<Eigen::Index>();
    const auto cols = t.at("shape").at(1).get<Eigen::Index>();
    const auto offset = t.at("offset").get<std::uint64_t>();
    Matrix m(rows, cols);
    in.seekg(payload_start + static_cast<std::streamoff>(offset * sizeof(double)));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint payload in " + path.string());
    ckpt.stores[t.at("store").get<std::string>()].add(t.at("name").get<std::string>(), std::move(m));
  }
  return ckpt;
}

}  // namespace w2l::nn
