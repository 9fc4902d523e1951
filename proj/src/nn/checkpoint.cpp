#include "dwellrec/nn/checkpoint.hpp"

#include <fstream>
#include <set>

#include "dwellrec/detail/binio.hpp"
#include "dwellrec/errors.hpp"

namespace dwellrec::nn {

using detail::read_bytes;
using detail::read_le;
using detail::try_read_le;
using detail::write_le;

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open checkpoint for writing: " + path.string());
  os.write("NRCK", 4);
  write_le<std::uint32_t>(os, kCheckpointVersion);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Param& p = params[i];
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_le<std::uint32_t>(os, 2);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.value.rows()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.value.cols()));
    for (double v : p.value.data()) write_le<double>(os, v);
  }
  if (!os) throw FormatError("failed writing checkpoint " + path.string());
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint " + path.string());
  if (read_bytes(is, 4, "checkpoint magic") != "NRCK") {
    throw FormatError(path.string() + " is not a checkpoint (bad magic)");
  }
  const auto version = read_le<std::uint32_t>(is, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  std::vector<std::pair<std::string, Tensor>> out;
  std::uint32_t name_len = 0;
  while (try_read_le(is, name_len, "parameter name length")) {
    std::string name = read_bytes(is, name_len, "parameter name");
    const auto rank = read_le<std::uint32_t>(is, "rank of " + name);
    if (rank == 0 || rank > 2) {
      throw FormatError("parameter '" + name + "' has unsupported rank " + std::to_string(rank));
    }
    std::size_t rows = 1, cols = 0;
    if (rank == 1) {
      cols = read_le<std::uint32_t>(is, "dims of " + name);
    } else {
      rows = read_le<std::uint32_t>(is, "dims of " + name);
      cols = read_le<std::uint32_t>(is, "dims of " + name);
    }
    Tensor t(rows, cols);
    for (auto& v : t.data()) v = read_le<double>(is, "values of " + name);
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

void load_checkpoint(const std::filesystem::path& path, ParamStore& params) {
  auto entries = read_checkpoint(path);
  std::set<std::string> seen;
  for (auto& [name, tensor] : entries) {
    Param* p = params.find(name);
    if (!p) throw FormatError("checkpoint has unexpected parameter '" + name + "'");
    if (!p->value.same_shape(tensor)) {
      throw FormatError("parameter '" + name + "' has shape " + tensor.shape_str() +
                        " in checkpoint, model expects " + p->value.shape_str());
    }
    p->value = std::move(tensor);
    seen.insert(name);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!seen.count(params[i].name)) {
      throw FormatError("checkpoint is missing parameter '" + params[i].name + "'");
    }
  }
}

}  // namespace dwellrec::nn
