#include "nfuse/numerics/ngt_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace nfuse {

namespace {

constexpr char kMagic[4] = {'N', 'G', 'T', '1'};

// This codebase targets little-endian hosts; NGT1 payloads are raw LE words.
static_assert(sizeof(float) == 4, "NGT1 requires 32-bit floats");

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("NGT1: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_ngt(const std::filesystem::path& path, const Tensor& t) {
  if (t.rank() == 0 || t.rank() > 255)
    throw std::invalid_argument("NGT1: rank must be in [1,255]");
  t.require_finite("NGT1 save " + path.string());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("NGT1: cannot open " + tmp.string());
    out.write(kMagic, 4);
    const unsigned char rank = static_cast<unsigned char>(t.rank());
    out.write(reinterpret_cast<const char*>(&rank), 1);
    for (std::size_t e : t.shape()) put_u32(out, static_cast<std::uint32_t>(e));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!out) throw std::runtime_error("NGT1: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Tensor load_ngt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("NGT1: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("NGT1: bad magic in " + path.string());
  unsigned char rank = 0;
  in.read(reinterpret_cast<char*>(&rank), 1);
  if (!in || rank == 0) throw std::runtime_error("NGT1: bad rank in " + path.string());
  std::vector<std::size_t> shape(rank);
  for (auto& e : shape) e = get_u32(in);
  Tensor t(shape);
  in.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != t.size() * sizeof(float))
    throw std::runtime_error("NGT1: truncated payload in " + path.string());
  t.require_finite("NGT1 load " + path.string());
  return t;
}

}  // namespace nfuse
