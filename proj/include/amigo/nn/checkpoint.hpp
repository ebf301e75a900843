#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "amigo/nn/tape.hpp"

namespace amigo::nn {

/// Checkpoint layout, all integers little-endian:
///   magic "AMIGOCKP" | u32 version | u32 tensor count
///   per tensor: u32 name length | name bytes | u32 rank | u32 dims[rank] | f32 values[]
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const ParamSet<float>& params);
ParamSet<float> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParamSet<float>& params);
ParamSet<float> load_checkpoint(const std::filesystem::path& path);

/// Copies values from `src` into `dst`; names and shapes must match exactly.
void assign_values(ParamSet<float>& dst, const ParamSet<float>& src);

}  // namespace amigo::nn
