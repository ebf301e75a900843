#include "amigo/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace amigo::nn {

namespace {

constexpr std::array<char, 8> kMagic{'A', 'M', 'I', 'G', 'O', 'C', 'K', 'P'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw IoError("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParamSet<float>& params) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(out, static_cast<std::uint32_t>(p.value.rank()));
    for (int d : p.value.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : p.value.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw IoError("checkpoint: write failed");
}

ParamSet<float> read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("checkpoint: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t count = get_u32(in);
  ParamSet<float> params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(in);
    if (len > 4096) throw IoError("checkpoint: implausible name length");
    std::string name(len, '\0');
    in.read(name.data(), len);
    const std::uint32_t rank = get_u32(in);
    if (rank > 8) throw IoError("checkpoint: implausible rank");
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(static_cast<int>(get_u32(in)));
    Tensor<float> t(shape);
    for (float& v : t.values) v = std::bit_cast<float>(get_u32(in));
    params.add(std::move(name), std::move(t));
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet<float>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

ParamSet<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

void assign_values(ParamSet<float>& dst, const ParamSet<float>& src) {
  if (dst.size() != src.size()) throw IoError("checkpoint: parameter count mismatch");
  for (int i = 0; i < dst.size(); ++i) {
    const auto* s = src.find(dst[i].name);
    if (s == nullptr) throw IoError("checkpoint: missing parameter " + dst[i].name);
    if (s->value.shape != dst[i].value.shape)
      throw IoError("checkpoint: shape mismatch for " + dst[i].name + ": " + shape_string(s->value.shape) +
                    " vs " + shape_string(dst[i].value.shape));
    dst[i].value.values = s->value.values;
  }
}

}  // namespace amigo::nn
