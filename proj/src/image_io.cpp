#include "dopamine/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dopamine {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

// Skips PGM whitespace and '#' comment lines, then reads one unsigned int.
int read_pgm_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) io_fail(path, "malformed PGM header");
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 30) io_fail(path, "PGM header value out of range");
    c = in.get();
  }
  if (c == EOF) io_fail(path, "truncated PGM header");
  return static_cast<int>(value);
}

Image load_pgm(std::ifstream& in, const std::filesystem::path& path) {
  const int width = read_pgm_int(in, path);
  const int height = read_pgm_int(in, path);
  const int maxval = read_pgm_int(in, path);
  if (width <= 0 || height <= 0) io_fail(path, "bad PGM dimensions");
  if (maxval != 255) io_fail(path, "unsupported PGM maxval (only 8-bit / 255)");
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) io_fail(path, "truncated PGM payload");
  Image img(height, width);
  double* p = img.pixels.data();
  for (std::size_t i = 0; i < raw.size(); ++i) p[i] = static_cast<double>(raw[i]) / 255.0;
  return img;
}

Image load_f32(std::ifstream& in, const std::filesystem::path& path) {
  std::string header;
  if (!std::getline(in, header)) io_fail(path, "missing F32 header");
  std::istringstream hs(header);
  std::string magic;
  long width = 0, height = 0;
  hs >> magic >> width >> height;
  if (magic != "F32" || width <= 0 || height <= 0 || !hs) io_fail(path, "malformed F32 header");
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<float> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(float))) io_fail(path, "truncated F32 payload");
  if (in.peek() != EOF) io_fail(path, "trailing bytes after F32 payload");
  Image img(static_cast<int>(height), static_cast<int>(width));
  double* p = img.pixels.data();
  for (std::size_t i = 0; i < count; ++i) p[i] = static_cast<double>(raw[i]);
  return img;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  char magic[3] = {0, 0, 0};
  in.read(magic, 3);
  if (in.gcount() < 2) io_fail(path, "file too short");
  if (magic[0] == 'P' && magic[1] == '5') {
    if (in.gcount() == 3 && !std::isspace(static_cast<unsigned char>(magic[2]))) {
      io_fail(path, "malformed PGM header");
    }
    return load_pgm(in, path);
  }
  if (in.gcount() == 3 && std::memcmp(magic, "F32", 3) == 0) {
    in.seekg(0);
    return load_f32(in, path);
  }
  io_fail(path, "unsupported image format (expected PGM P5 or F32)");
}

void save_image(const std::filesystem::path& path, const Image& image, bool clip) {
  const std::string ext = path.extension().string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail(path, "cannot open for writing");
  const double* p = image.pixels.data();
  const std::int64_t n = image.pixels.numel();
  if (ext == ".pgm") {
    out << "P5\n" << image.width() << " " << image.height() << "\n255\n";
    std::vector<unsigned char> raw(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      double v = p[i];
      if (clip) v = std::clamp(v, 0.0, 1.0);
      const long q = std::lround(255.0 * v);
      raw[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::clamp(q, 0L, 255L));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  } else if (ext == ".f32") {
    out << "F32 " << image.width() << " " << image.height() << "\n";
    std::vector<float> raw(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      double v = p[i];
      if (clip) v = std::clamp(v, 0.0, 1.0);
      raw[static_cast<std::size_t>(i)] = static_cast<float>(v);
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
  } else {
    io_fail(path, "unsupported output extension (use .pgm or .f32)");
  }
  if (!out) io_fail(path, "write failed");
}

}  // namespace dopamine
