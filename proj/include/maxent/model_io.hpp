#pragma once

#include "maxent/pbn.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace maxent {

/// PBN1 model file, all integers and floats little-endian:
///
///   "PBN1"                        4 bytes
///   layer count                   u32
///   per layer: N, M, kind tag     u32 x 3   (0 ted, 1 tg, 2 exp, 3 linear)
///   per layer: W                  N*M f64, row-major (N rows, M columns)
///              theta0             N f64
///              bias               M f64
std::string encode_model(const PbnNetwork& net);

/// Throws InvalidInput on a bad magic string, truncation, trailing bytes or
/// an invalid layer description.
PbnNetwork decode_model(std::string_view bytes);

void save_model(const PbnNetwork& net, const std::filesystem::path& path);
PbnNetwork load_model(const std::filesystem::path& path);

}  // namespace maxent
