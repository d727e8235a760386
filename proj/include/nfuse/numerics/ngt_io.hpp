#pragma once

#include <filesystem>
#include <string>

#include "nfuse/numerics/tensor.hpp"

namespace nfuse {

// "NGT1" tensor file: magic "NGT1", u8 rank, rank x u32 little-endian
// extents, then row-major little-endian 32-bit floats. Writes go through a
// temp file + rename. NaN/Inf payloads are rejected on both save and load.
void save_ngt(const std::filesystem::path& path, const Tensor& t);
Tensor load_ngt(const std::filesystem::path& path);

}  // namespace nfuse
