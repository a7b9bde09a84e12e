// Copyright 2026 The segkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segkit/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "segkit/tensor.hpp"

namespace segkit::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw DataError(path + ": " + what);
}

Image read_png_internal(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(path, "cannot open for reading");

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    fail(path, "not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  if (!png) fail(path, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(path, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "malformed PNG data");
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte depth = png_get_bit_depth(png, info);
  const png_byte color = png_get_color_type(png, info);
  if (depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unsupported bit depth 16 (only 8-bit PNG supported)");
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int ch = static_cast<int>(png_get_channels(png, info));
  if (ch != 1 && ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unsupported channel count " + std::to_string(ch));
  }

  std::vector<png_byte> raster(static_cast<std::size_t>(h) * w * ch);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int r = 0; r < h; ++r)
    rows[static_cast<std::size_t>(r)] =
        raster.data() + static_cast<std::size_t>(r) * w * ch;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img = Image::zeros(h, w, ch);
  for (std::size_t i = 0; i < raster.size(); ++i)
    img.data[i] = raster[i] / 255.0;
  return img;
}

void write_png_internal(const std::string& path, int h, int w, int ch,
                        const double* data) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(path, "cannot open for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) fail(path, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "PNG write failed");
  }

  png_init_io(png, fp.get());
  // fixed settings keep output byte-reproducible across runs
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w),
               static_cast<png_uint_32>(h), 8,
               ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(w) * ch);
  for (int r = 0; r < h; ++r) {
    for (int i = 0; i < w * ch; ++i) {
      const double v = data[static_cast<std::size_t>(r) * w * ch + i];
      const double q = std::round(v * 255.0);
      row[static_cast<std::size_t>(i)] =
          static_cast<png_byte>(q < 0.0 ? 0.0 : (q > 255.0 ? 255.0 : q));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

template <class T>
void read_exact(std::ifstream& in, T* out, std::size_t count,
                const std::string& path) {
  in.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(sizeof(T) * count));
  if (static_cast<std::size_t>(in.gcount()) != sizeof(T) * count)
    fail(path, "truncated tensor file");
}

}  // namespace

Image read_png_image(const std::string& path) { return read_png_internal(path); }

Mask read_png_mask(const std::string& path) {
  Image img = read_png_internal(path);
  if (img.channels == 3) img = tensor::to_grayscale(img);
  Mask m;
  m.height = img.height;
  m.width = img.width;
  m.data = std::move(img.data);
  return m;
}

void write_png(const std::string& path, const Image& img) {
  write_png_internal(path, img.height, img.width, img.channels, img.data.data());
}

void write_png(const std::string& path, const Mask& mask) {
  write_png_internal(path, mask.height, mask.width, 1, mask.data.data());
}

TensorData read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");

  char magic[4];
  read_exact(in, magic, 4, path);
  if (std::memcmp(magic, "STNS", 4) != 0) fail(path, "bad magic (expected STNS)");

  std::uint32_t ndim = 0;
  read_exact(in, &ndim, 1, path);
  if (ndim == 0 || ndim > 8) fail(path, "unreasonable tensor rank");

  TensorData t;
  t.dims.resize(ndim);
  read_exact(in, t.dims.data(), ndim, path);

  std::uint64_t count = 1;
  for (std::uint32_t d : t.dims) {
    if (d == 0) fail(path, "zero-sized dimension");
    count *= d;
    if (count > (1ULL << 32)) fail(path, "tensor too large");
  }
  t.values.resize(static_cast<std::size_t>(count));
  read_exact(in, t.values.data(), static_cast<std::size_t>(count), path);

  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0) fail(path, "trailing bytes after payload");
  return t;
}

void write_tensor(const std::string& path, const TensorData& tensor) {
  std::uint64_t count = 1;
  for (std::uint32_t d : tensor.dims) count *= d;
  detail::require(count == tensor.values.size(),
                  "write_tensor: dims/payload mismatch");

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out.write("STNS", 4);
  const std::uint32_t ndim = static_cast<std::uint32_t>(tensor.dims.size());
  out.write(reinterpret_cast<const char*>(&ndim), 4);
  out.write(reinterpret_cast<const char*>(tensor.dims.data()),
            static_cast<std::streamsize>(4 * tensor.dims.size()));
  out.write(reinterpret_cast<const char*>(tensor.values.data()),
            static_cast<std::streamsize>(4 * tensor.values.size()));
  if (!out) fail(path, "write failed");
}

FeatureMap tensor_to_feature_map(const TensorData& tensor) {
  detail::require_data(tensor.dims.size() == 3,
                       "feature map tensor must have 3 dims (h', w', D)");
  FeatureMap f = FeatureMap::zeros(static_cast<int>(tensor.dims[0]),
                                   static_cast<int>(tensor.dims[1]),
                                   static_cast<int>(tensor.dims[2]));
  for (std::size_t i = 0; i < tensor.values.size(); ++i) {
    detail::require_data(std::isfinite(tensor.values[i]),
                         "feature map tensor contains non-finite values");
    f.data[i] = tensor.values[i];
  }
  return f;
}

Mask tensor_to_mask(const TensorData& tensor) {
  detail::require_data(tensor.dims.size() == 2,
                       "mask tensor must have 2 dims (h, w)");
  Mask m = Mask::zeros(static_cast<int>(tensor.dims[0]),
                       static_cast<int>(tensor.dims[1]));
  for (std::size_t i = 0; i < tensor.values.size(); ++i) {
    const float v = tensor.values[i];
    detail::require_data(std::isfinite(v) && v >= 0.0f && v <= 1.0f,
                         "mask tensor values must lie in [0,1]");
    m.data[i] = v;
  }
  return m;
}

TensorData to_tensor(const FeatureMap& features) {
  TensorData t;
  t.dims = {static_cast<std::uint32_t>(features.grid_h),
            static_cast<std::uint32_t>(features.grid_w),
            static_cast<std::uint32_t>(features.dim)};
  t.values.assign(features.data.begin(), features.data.end());
  return t;
}

TensorData to_tensor(const Mask& mask) {
  TensorData t;
  t.dims = {static_cast<std::uint32_t>(mask.height),
            static_cast<std::uint32_t>(mask.width)};
  t.values.assign(mask.data.begin(), mask.data.end());
  return t;
}

FeatureMap read_feature_map(const std::string& path) {
  return tensor_to_feature_map(read_tensor(path));
}

Mask read_mask_tensor(const std::string& path) {
  return tensor_to_mask(read_tensor(path));
}

}  // namespace segkit::io
