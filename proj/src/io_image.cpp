#include "hogs/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hogs {

Image read_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw DataError("cannot read PNG " + path + ": " + img.message);
  }
  if (img.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&img);
    throw DataError("PNG " + path + " is not 8-bit");
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw DataError("cannot decode PNG " + path + ": " + msg);
  }
  Image out(static_cast<int>(img.width), static_cast<int>(img.height), 3);
  for (size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] / 255.0;
  return out;
}

void write_png(const Image& src, const std::string& path) {
  if (src.channels != 1 && src.channels != 3) {
    throw std::invalid_argument("PNG output needs 1 or 3 channels");
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(src.width);
  img.height = static_cast<png_uint_32>(src.height);
  img.format = src.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(src.data.size());
  for (size_t i = 0; i < buf.size(); ++i) {
    const double v = std::isfinite(src.data[i]) ? std::clamp(src.data[i], 0.0, 1.0) : 0.0;
    buf[i] = static_cast<png_byte>(std::lround(v * 255.0));
  }
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw DataError("cannot write PNG " + path + ": " + img.message);
  }
}

Image read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open PFM " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic;
  if (magic != "Pf" && magic != "PF") throw DataError(path + ": bad PFM magic '" + magic + "'");
  if (!(in >> w >> h >> scale) || w <= 0 || h <= 0 || scale == 0.0) {
    throw DataError(path + ": malformed PFM header");
  }
  in.get();  // single whitespace before the raster
  const int channels = magic == "PF" ? 3 : 1;
  const bool little = scale < 0.0;
  std::vector<uint32_t> raw(static_cast<size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (static_cast<size_t>(in.gcount()) != raw.size() * 4) throw DataError(path + ": truncated PFM");
  const bool swap = little != (std::endian::native == std::endian::little);
  Image out(w, h, channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        uint32_t bits = raw[(static_cast<size_t>(h - 1 - y) * w + x) * channels + c];
        if (swap) bits = __builtin_bswap32(bits);
        out.at(x, y, c) = std::bit_cast<float>(bits);
      }
    }
  }
  return out;
}

void write_pfm(const Image& img, const std::string& path, bool little_endian) {
  if (img.channels != 1 && img.channels != 3) {
    throw std::invalid_argument("PFM output needs 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PFM " + path);
  out << (img.channels == 3 ? "PF" : "Pf") << '\n'
      << img.width << ' ' << img.height << '\n'
      << (little_endian ? "-1.0" : "1.0") << '\n';
  const bool swap = little_endian != (std::endian::native == std::endian::little);
  for (int y = img.height - 1; y >= 0; --y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        uint32_t bits = std::bit_cast<uint32_t>(static_cast<float>(img.at(x, y, c)));
        if (swap) bits = __builtin_bswap32(bits);
        out.write(reinterpret_cast<const char*>(&bits), 4);
      }
    }
  }
  if (!out) throw DataError("failed writing PFM " + path);
}

}  // namespace hogs
