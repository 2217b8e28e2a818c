#include "nutsedge/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace nutsedge {
namespace {

struct FileCloser {
  void operator()(FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

RasterImage load_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) fail("load_png: cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail("load_png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail("load_png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("load_png: malformed PNG " + path.string());
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("load_png: 16-bit PNG not supported: " + path.string());
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  RasterImage image(static_cast<int>(w), static_cast<int>(h));
  std::vector<png_bytep> rows(h);
  for (png_uint_32 v = 0; v < h; ++v)
    rows[v] = image.pixels().data() + static_cast<size_t>(v) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void save_png(const RasterImage& image, const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) fail("save_png: cannot open " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail("save_png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail("save_png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("save_png: write failure " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_const_bytep> rows(image.height());
  for (int v = 0; v < image.height(); ++v)
    rows[v] = image.pixels().data() + static_cast<size_t>(v) * image.width() * 3;
  png_write_rows(png, const_cast<png_bytepp>(const_cast<png_const_bytep*>(rows.data())),
                 image.height());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

FloatGrid load_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("load_pfm: cannot open " + path.string());

  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || magic != "Pf" || width < 1 || height < 1 || scale == 0.0)
    fail("load_pfm: malformed header in " + path.string());
  in.get();  // single whitespace byte after the scale

  // Negative scale: little-endian. Scanlines written top-to-bottom.
  if (scale > 0.0) fail("load_pfm: big-endian PFM not supported: " + path.string());
  std::vector<float> buffer(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()) * 4);
  if (!in) fail("load_pfm: truncated data in " + path.string());
  FloatGrid map(height, width);
  for (Eigen::Index i = 0; i < map.size(); ++i) map.data()[i] = buffer[i];
  return map;
}

void save_pfm(const FloatGrid& map, const std::filesystem::path& path) {
  require(map.allFinite(), "save_pfm: non-finite values");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("save_pfm: cannot open " + path.string());
  out << "Pf\n" << map.cols() << " " << map.rows() << "\n-1.0\n";
  std::vector<float> buffer(static_cast<size_t>(map.size()));
  for (Eigen::Index i = 0; i < map.size(); ++i) buffer[i] = static_cast<float>(map.data()[i]);
  out.write(reinterpret_cast<const char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size()) * 4);
  if (!out) fail("save_pfm: write failure " + path.string());
}

void save_map_preview_png(const FloatGrid& map, const std::filesystem::path& path) {
  RasterImage preview(static_cast<int>(map.cols()), static_cast<int>(map.rows()));
  for (int v = 0; v < preview.height(); ++v)
    for (int u = 0; u < preview.width(); ++u) {
      const double x = std::clamp(map(v, u), 0.0, 1.0);
      const auto g = static_cast<uint8_t>(std::lround(x * 255.0));
      preview.at(u, v, 0) = preview.at(u, v, 1) = preview.at(u, v, 2) = g;
    }
  save_png(preview, path);
}

}  // namespace nutsedge
