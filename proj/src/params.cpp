#include "kai0/params.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace kai0 {

namespace {

constexpr char kMagic[8] = {'K', 'A', 'I', '0', 'P', 'V', '1', '\0'};
constexpr std::uint32_t kMaxLayoutBytes = 1u << 20;

void write_exact(std::ofstream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw std::runtime_error("param checkpoint: write failed");
}

void read_exact(std::ifstream& in, void* data, std::size_t n,
                const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw std::runtime_error(std::string("param checkpoint: truncated file (") +
                             what + ")");
}

// Serialization is explicitly little-endian regardless of host order.
template <typename T>
void write_le(std::ofstream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  write_exact(out, buf, sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  read_exact(in, buf, sizeof(T), what);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

}  // namespace

void validate(const ParameterVector& p) {
  if (p.values.empty())
    throw std::invalid_argument("ParameterVector: empty value vector");
  for (double v : p.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("ParameterVector: non-finite entry");
}

void require_combinable(const ParameterVector& a, const ParameterVector& b) {
  if (a.layout_id != b.layout_id)
    throw std::invalid_argument("layout mismatch: '" + a.layout_id +
                                "' vs '" + b.layout_id + "'");
  if (a.values.size() != b.values.size())
    throw std::invalid_argument(
        "length mismatch for layout '" + a.layout_id + "': " +
        std::to_string(a.values.size()) + " vs " +
        std::to_string(b.values.size()));
}

ParameterVector param_axpy(const ParameterVector& dst, double alpha,
                           const ParameterVector& src) {
  require_combinable(dst, src);
  ParameterVector out = dst;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] += alpha * src.values[i];
  return out;
}

void save_params(const ParameterVector& p, const std::filesystem::path& path) {
  if (p.layout_id.size() > kMaxLayoutBytes)
    throw std::invalid_argument("param checkpoint: layout string overflow");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("param checkpoint: cannot open " +
                                     path.string() + " for writing");
  write_exact(out, kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.layout_id.size()));
  write_exact(out, p.layout_id.data(), p.layout_id.size());
  write_le<std::uint64_t>(out, p.values.size());
  for (double v : p.values) write_le<double>(out, v);
}

ParameterVector load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("param checkpoint: cannot open " +
                                    path.string());
  char magic[8];
  read_exact(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("param checkpoint: bad magic in " + path.string());

  const auto layout_len = read_le<std::uint32_t>(in, "layout length");
  if (layout_len > kMaxLayoutBytes)
    throw std::runtime_error("param checkpoint: layout string overflow");
  ParameterVector p;
  p.layout_id.resize(layout_len);
  if (layout_len > 0) read_exact(in, p.layout_id.data(), layout_len, "layout");

  const auto count = read_le<std::uint64_t>(in, "value count");
  p.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    p.values[i] = read_le<double>(in, "values");
  return p;
}

}  // namespace kai0
