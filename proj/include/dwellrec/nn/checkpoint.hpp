// Named-parameter checkpoint file.
//
//   "NRCK" | u32 version (1) | repeated until EOF:
//     u32 name length | name bytes | u32 rank | u32 dims[rank] | f64 values
//
// All integers and floats are little-endian.

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dwellrec/nn/param.hpp"
#include "dwellrec/nn/tensor.hpp"

namespace dwellrec::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params);

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::filesystem::path& path);

// Copies values into an existing store. Names and shapes must match exactly;
// a missing, extra or mis-shaped parameter throws FormatError.
void load_checkpoint(const std::filesystem::path& path, ParamStore& params);

}  // namespace dwellrec::nn
