#include "clinn/network.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

namespace clinn {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'L', 'I', 'N', 'N', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

// 53 random mantissa bits -> [0, 1); identical on every platform for a given
// mt19937_64 stream, unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::string Architecture::describe() const {
  return "width=" + std::to_string(width) + " depth=" + std::to_string(depth) +
         " input_dim=" + std::to_string(input_dim);
}

NetworkParams::NetworkParams(const Architecture& arch)
    : arch_(arch), values_(arch.parameter_count(), 0.0) {
  if (arch.width == 0 || arch.input_dim == 0) throw InvalidArgument("network width and input dim must be >= 1");
}

NetworkParams::NetworkParams(const Architecture& arch, std::vector<double> values)
    : arch_(arch), values_(std::move(values)) {
  if (values_.size() != arch.parameter_count()) {
    throw ShapeMismatch("parameter vector has " + std::to_string(values_.size()) + " entries, " +
                        arch.describe() + " needs " + std::to_string(arch.parameter_count()));
  }
}

AffineSlice NetworkParams::lift() const {
  const auto n = arch_.width;
  return {0, n * arch_.input_dim, n, arch_.input_dim};
}

AffineSlice NetworkParams::block(std::size_t k) const {
  const auto n = arch_.width;
  if (k >= arch_.depth) throw InvalidArgument("block index out of range");
  const std::size_t off = n * arch_.input_dim + n + k * (n * n + n);
  return {off, off + n * n, n, n};
}

AffineSlice NetworkParams::projection() const {
  const auto n = arch_.width;
  const std::size_t off = n * arch_.input_dim + n + arch_.depth * (n * n + n);
  return {off, off + n, 1, n};
}

NetworkParams init_params(const Architecture& arch, std::uint64_t seed) {
  NetworkParams p(arch);
  std::mt19937_64 rng(seed);
  auto fill = [&](const AffineSlice& s) {
    const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    for (std::size_t i = 0; i < s.rows * s.cols; ++i) {
      p.values()[s.weight_offset + i] = limit * (2.0 * unit_uniform(rng) - 1.0);
    }
  };
  fill(p.lift());
  for (std::size_t k = 0; k < arch.depth; ++k) fill(p.block(k));
  fill(p.projection());
  return p;
}

double forward(const NetworkParams& params, std::span<const double> point) {
  return forward_generic<double, double>(params.arch(), params.values(), point);
}

InputGradient eval_with_input_grads(const NetworkParams& params, std::span<const double> point) {
  using D = diff::Dual<double>;
  const std::size_t dims = params.arch().input_dim;
  std::vector<D> in;
  in.reserve(dims);
  for (std::size_t i = 0; i < point.size(); ++i) in.push_back(D::variable(point[i], dims, i));
  const D out = forward_generic<double, D>(params.arch(), params.values(), std::span<const D>(in));

  InputGradient g;
  g.u = out.value();
  for (std::size_t i = 0; i + 1 < dims; ++i) g.du_dx.push_back(out.tangent(i));
  g.du_dt = out.tangent(dims - 1);
  return g;
}

void save_params(const NetworkParams& params, const std::filesystem::path& path) {
  const auto& a = params.arch();
  std::string buf(kMagic.begin(), kMagic.end());
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(a.width));
  put_u32(buf, static_cast<std::uint32_t>(a.depth));
  put_u32(buf, static_cast<std::uint32_t>(a.input_dim));
  put_u64(buf, params.size());
  for (double v : params.values()) put_u64(buf, std::bit_cast<std::uint64_t>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

NetworkParams load_params(const std::filesystem::path& path, const std::optional<Architecture>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  constexpr std::size_t kHeader = 8 + 4 * 4 + 8;
  if (buf.size() < kHeader) throw ParseError("checkpoint too short: " + path.string());
  if (std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) {
    throw ParseError("bad checkpoint magic: " + path.string());
  }
  if (get_le(buf, 8, 4) != kVersion) throw ParseError("unsupported checkpoint version");

  Architecture found;
  found.width = get_le(buf, 12, 4);
  found.depth = get_le(buf, 16, 4);
  found.input_dim = get_le(buf, 20, 4);
  const std::uint64_t count = get_le(buf, 24, 8);

  if (found.width == 0 || found.input_dim == 0) throw ParseError("checkpoint header has zero width");
  if (count != found.parameter_count() || buf.size() != kHeader + 8 * count) {
    throw ShapeMismatch("checkpoint header " + found.describe() + " expects " +
                        std::to_string(found.parameter_count()) + " parameters, file holds " +
                        std::to_string((buf.size() - kHeader) / 8));
  }
  if (expected && !(*expected == found)) {
    throw ShapeMismatch("checkpoint shape mismatch: expected " + expected->describe() + ", found " +
                        found.describe());
  }

  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<double>(get_le(buf, kHeader + 8 * i, 8));
  }
  return NetworkParams(found, std::move(values));
}

}  // namespace clinn
