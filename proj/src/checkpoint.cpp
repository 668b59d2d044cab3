#include "dopamine/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace dopamine {

namespace {

constexpr char kMagic[4] = {'D', 'P', 'M', 'N'};
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void ckpt_fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

bool get_bytes(std::istream& in, void* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return in.gcount() == static_cast<std::streamsize>(n);
}

bool get_u16(std::istream& in, std::uint16_t& v) {
  unsigned char b[2];
  if (!get_bytes(in, b, 2)) return false;
  v = static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  return true;
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!get_bytes(in, b, 4)) return false;
  v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return true;
}

bool get_u64(std::istream& in, std::uint64_t& v) {
  unsigned char b[8];
  if (!get_bytes(in, b, 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return true;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const DopamineModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ckpt_fail(path, "cannot open for writing");
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(model.num_layers));
  put_u32(out, static_cast<std::uint32_t>(model.channels));

  auto named = const_cast<DopamineModel&>(model).named_parameters();
  put_u32(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.put(static_cast<char>(tensor->rank()));
    for (int d = 0; d < tensor->rank(); ++d) put_u64(out, static_cast<std::uint64_t>(tensor->dim(d)));
    for (std::int64_t i = 0, n = tensor->numel(); i < n; ++i) {
      put_f32(out, static_cast<float>((*tensor)[i]));
    }
  }
  if (!out) ckpt_fail(path, "write failed");
}

DopamineModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ckpt_fail(path, "cannot open");
  char magic[4];
  if (!get_bytes(in, magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    ckpt_fail(path, "bad magic (not a DPMN checkpoint)");
  }
  std::uint32_t version = 0, layers = 0, channels = 0, count = 0;
  if (!get_u32(in, version) || version != kVersion) ckpt_fail(path, "unsupported version");
  if (!get_u32(in, layers) || !get_u32(in, channels) || layers < 1 || channels < 1 ||
      layers > 4096 || channels > 65536) {
    ckpt_fail(path, "bad architecture descriptor");
  }
  DopamineModel model = DopamineModel::create(
      {static_cast<int>(layers), static_cast<int>(channels)});
  auto named = model.named_parameters();
  if (!get_u32(in, count) || count != named.size()) ckpt_fail(path, "bad tensor count");

  for (auto& [name, tensor] : named) {
    std::uint16_t len = 0;
    if (!get_u16(in, len)) ckpt_fail(path, "truncated record");
    std::string rec_name(len, '\0');
    if (!get_bytes(in, rec_name.data(), len)) ckpt_fail(path, "truncated record");
    if (rec_name != name) ckpt_fail(path, "unexpected tensor name: " + rec_name);
    const int rank = in.get();
    if (rank != tensor->rank()) ckpt_fail(path, "rank mismatch for " + name);
    for (int d = 0; d < rank; ++d) {
      std::uint64_t extent = 0;
      if (!get_u64(in, extent) || extent != static_cast<std::uint64_t>(tensor->dim(d))) {
        ckpt_fail(path, "shape mismatch for " + name);
      }
    }
    for (std::int64_t i = 0, n = tensor->numel(); i < n; ++i) {
      std::uint32_t bits = 0;
      if (!get_u32(in, bits)) ckpt_fail(path, "truncated payload for " + name);
      float v;
      std::memcpy(&v, &bits, 4);
      (*tensor)[i] = static_cast<double>(v);
    }
  }
  if (in.peek() != EOF) ckpt_fail(path, "trailing bytes after last tensor");
  return model;
}

}  // namespace dopamine
