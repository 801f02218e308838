#include "slambench/ingest/raster.hpp"

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <png.h>

#include "slambench/error.hpp"

namespace slambench::ingest {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& why) {
  throw Error(Errc::MissingRaster, path.string() + ": " + why);
}

std::uint32_t read_pnm_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) fail(path, "malformed PNM header");
  std::uint64_t v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
    if (v > 0xffffffu) fail(path, "PNM header value too large");
    c = in.get();
  }
  return static_cast<std::uint32_t>(v);
}

Raster read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) fail(path, "not a binary PGM/PPM");
  Raster r;
  r.channels = magic[1] == '6' ? 3 : 1;
  r.width = read_pnm_int(in, path);
  r.height = read_pnm_int(in, path);
  const std::uint32_t maxval = read_pnm_int(in, path);
  if (maxval == 0 || maxval > 65535) fail(path, "bad maxval");
  r.bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t n = std::size_t{r.width} * r.height * r.channels * r.bytes_per_sample;
  r.data.resize(n);
  in.read(reinterpret_cast<char*>(r.data.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) fail(path, "truncated pixel data");
  if (r.bytes_per_sample == 2)  // PNM stores big-endian samples
    for (std::size_t i = 0; i < n; i += 2) std::swap(r.data[i], r.data[i + 1]);
  return r;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

Raster read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(path, "cannot open");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "libpng initialisation failed");
  }
  Raster r;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "corrupt PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  r.width = png_get_image_width(png, info);
  r.height = png_get_image_height(png, info);
  r.channels = png_get_channels(png, info);
  r.bytes_per_sample = png_get_bit_depth(png, info) == 16 ? 2 : 1;
  const std::size_t stride = png_get_rowbytes(png, info);
  r.data.resize(stride * r.height);
  rows.resize(r.height);
  for (std::uint32_t y = 0; y < r.height; ++y) rows[y] = r.data.data() + y * stride;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  if (r.channels != 1 && r.channels != 3) fail(path, "unsupported channel count");
  return r;
}

}  // namespace

Raster read_raster(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(path, "file not found");
  std::ifstream probe(path, std::ios::binary);
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  if (probe.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  return read_pnm(path);
}

void write_pnm(const std::filesystem::path& path, const Raster& raster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << (raster.channels == 3 ? "P6" : "P5") << '\n'
      << raster.width << ' ' << raster.height << '\n'
      << (raster.bytes_per_sample == 2 ? 65535 : 255) << '\n';
  std::vector<std::uint8_t> data = raster.data;
  if (raster.bytes_per_sample == 2)
    for (std::size_t i = 0; i + 1 < data.size(); i += 2) std::swap(data[i], data[i + 1]);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

std::vector<std::uint8_t> to_rgb8(const Raster& r) {
  const std::size_t n = std::size_t{r.width} * r.height;
  std::vector<std::uint8_t> out(n * 3);
  const std::size_t bps = r.bytes_per_sample;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t src = (i * r.channels + (r.channels == 3 ? c : 0)) * bps;
      out[i * 3 + c] = bps == 2 ? r.data[src + 1] : r.data[src];  // high byte of 16-bit samples
    }
  return out;
}

std::vector<std::uint8_t> to_grey8(const Raster& r) {
  const std::size_t n = std::size_t{r.width} * r.height;
  std::vector<std::uint8_t> out(n);
  const std::size_t bps = r.bytes_per_sample;
  for (std::size_t i = 0; i < n; ++i) {
    if (r.channels == 1) {
      out[i] = bps == 2 ? r.data[i * 2 + 1] : r.data[i];
    } else {
      unsigned sum = 0;
      for (std::size_t c = 0; c < 3; ++c) sum += bps == 2 ? r.data[(i * 3 + c) * 2 + 1] : r.data[i * 3 + c];
      out[i] = static_cast<std::uint8_t>((sum + 1) / 3);
    }
  }
  return out;
}

std::vector<std::uint8_t> to_depth16(const Raster& r) {
  if (r.channels != 1) throw Error(Errc::MissingRaster, "depth raster must be single channel");
  const std::size_t n = std::size_t{r.width} * r.height;
  if (r.bytes_per_sample == 2) return {r.data.begin(), r.data.begin() + static_cast<std::ptrdiff_t>(n * 2)};
  std::vector<std::uint8_t> out(n * 2, 0);
  for (std::size_t i = 0; i < n; ++i) out[i * 2] = r.data[i];
  return out;
}

}  // namespace slambench::ingest
