#include "image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "io_util.hpp"

namespace dmdhsi {

Image Image::zeros(int w, int h) {
  Image img;
  img.width = w;
  img.height = h;
  img.data.assign(std::size_t(w) * h, 0.0f);
  return img;
}

RgbImage RgbImage::zeros(int w, int h) {
  RgbImage img;
  img.width = w;
  img.height = h;
  img.data.assign(3 * std::size_t(w) * h, 0.0f);
  return img;
}

Image RgbImage::luminance() const {
  Image lum = Image::zeros(width, height);
  const std::size_t n = plane();
  for (std::size_t i = 0; i < n; ++i) {
    lum.data[i] = (data[i] + data[n + i] + data[2 * n + i]) / 3.0f;
  }
  return lum;
}

namespace {

int quantize_sample(float v, int maxval) {
  const long code = std::lround(double(v));
  return int(std::clamp(code, 0L, long(maxval)));
}

void put_sample(std::ostream& out, int code, int maxval) {
  if (maxval > 255) {
    const unsigned char hi = static_cast<unsigned char>((code >> 8) & 0xff);
    const unsigned char lo = static_cast<unsigned char>(code & 0xff);
    out.put(char(hi));
    out.put(char(lo));
  } else {
    out.put(char(static_cast<unsigned char>(code)));
  }
}

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t payload_offset = 0;
};

// Parses a binary netpbm header: magic, whitespace/comment separated
// dimensions and maxval, then a single whitespace byte before the payload.
PnmHeader parse_pnm_header(const std::string& bytes, const std::string& path) {
  PnmHeader h;
  std::size_t pos = 0;
  auto skip_space = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_token = [&]() -> std::string {
    skip_space();
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw IoError("truncated netpbm header: " + path);
    return bytes.substr(start, pos - start);
  };
  h.magic = read_token();
  auto number = [&](const char* what) {
    try {
      return std::stoi(read_token());
    } catch (const std::exception&) {
      throw IoError(std::string("bad ") + what + " in netpbm header: " + path);
    }
  };
  h.width = number("width");
  h.height = number("height");
  h.maxval = number("maxval");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw IoError("malformed netpbm header: " + path);
  }
  ++pos;
  h.payload_offset = pos;
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535) {
    throw IoError("bad netpbm dimensions: " + path);
  }
  return h;
}

std::vector<float> read_pnm_samples(const std::string& bytes, const PnmHeader& h,
                                    std::size_t count, const std::string& path) {
  const int bytes_per = h.maxval > 255 ? 2 : 1;
  if (bytes.size() - h.payload_offset < count * bytes_per) {
    throw IoError("truncated netpbm payload: " + path);
  }
  std::vector<float> v(count);
  const unsigned char* p =
      reinterpret_cast<const unsigned char*>(bytes.data()) + h.payload_offset;
  if (bytes_per == 1) {
    for (std::size_t i = 0; i < count; ++i) v[i] = float(p[i]);
  } else {
    for (std::size_t i = 0; i < count; ++i) v[i] = float((p[2 * i] << 8) | p[2 * i + 1]);
  }
  return v;
}

}  // namespace

void write_pgm(const std::string& path, const Image& img, int maxval) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    for (float v : img.data) put_sample(out, quantize_sample(v, maxval), maxval);
  });
}

Image read_pgm(const std::string& path, int* maxval_out) {
  const std::string bytes = read_entire_file(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P5") throw IoError("not a binary PGM (bad magic): " + path);
  Image img = Image::zeros(h.width, h.height);
  img.data = read_pnm_samples(bytes, h, img.pixel_count(), path);
  if (maxval_out) *maxval_out = h.maxval;
  return img;
}

void write_ppm(const std::string& path, const RgbImage& img, int maxval) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "P6\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    const std::size_t n = img.plane();
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        put_sample(out, quantize_sample(img.data[c * n + i], maxval), maxval);
      }
    }
  });
}

RgbImage read_ppm(const std::string& path, int* maxval_out) {
  const std::string bytes = read_entire_file(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P6") throw IoError("not a binary PPM (bad magic): " + path);
  RgbImage img = RgbImage::zeros(h.width, h.height);
  const std::size_t n = img.plane();
  std::vector<float> interleaved = read_pnm_samples(bytes, h, 3 * n, path);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) img.data[c * n + i] = interleaved[3 * i + c];
  }
  if (maxval_out) *maxval_out = h.maxval;
  return img;
}

void write_f32(const std::string& path, const std::vector<float>& values) {
  static_assert(sizeof(float) == 4);
  atomic_write_file(path, [&](std::ostream& out) {
    out.write(reinterpret_cast<const char*>(values.data()),
              std::streamsize(values.size() * sizeof(float)));
  });
}

std::vector<float> read_f32(const std::string& path, std::size_t expected_count) {
  const std::string bytes = read_entire_file(path);
  if (bytes.size() != expected_count * sizeof(float)) {
    throw IoError("float payload has wrong size: " + path);
  }
  std::vector<float> v(expected_count);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

}  // namespace dmdhsi
