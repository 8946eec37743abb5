#include "gridcurio/gridworld/render.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gridcurio/errors.hpp"

namespace gridcurio {
namespace {

constexpr Rgb kBlack{0, 0, 0};
constexpr Rgb kGridLine{40, 40, 40};
constexpr Rgb kWall{100, 100, 100};

class Canvas {
 public:
  Canvas(RgbImage& img, int x0, int y0, int tile) : img_(img), x0_(x0), y0_(y0), tile_(tile) {}

  void put(int px, int py, Rgb c) {
    if (px < 0 || py < 0 || px >= tile_ || py >= tile_) return;
    const std::size_t o = (static_cast<std::size_t>(y0_ + py) * img_.width + (x0_ + px)) * 3;
    img_.data[o] = c[0];
    img_.data[o + 1] = c[1];
    img_.data[o + 2] = c[2];
  }

  /// Fills [x0, x1) x [y0, y1) in tile-relative pixels.
  void fill(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) put(x, y, c);
    }
  }

  void frame(int inset, int thickness, Rgb c) {
    const int lo = inset;
    const int hi = tile_ - inset;
    fill(lo, lo, hi, lo + thickness, c);
    fill(lo, hi - thickness, hi, hi, c);
    fill(lo, lo, lo + thickness, hi, c);
    fill(hi - thickness, lo, hi, hi, c);
  }

  /// Isoceles triangle pointing along `dir` (0 east, 1 south, 2 west, 3 north).
  void triangle(int dir, Rgb c) {
    for (int py = 0; py < tile_; ++py) {
      for (int px = 0; px < tile_; ++px) {
        // Local frame with the apex toward +u; v is the lateral offset.
        const double cx = (px + 0.5) / tile_ - 0.5;
        const double cy = (py + 0.5) / tile_ - 0.5;
        double u = 0.0;
        double v = 0.0;
        switch (dir & 3) {
          case 0: u = cx; v = cy; break;
          case 1: u = cy; v = cx; break;
          case 2: u = -cx; v = cy; break;
          default: u = -cy; v = cx; break;
        }
        // Base at u = -0.38, apex at u = +0.38, half-width 0.3 at the base.
        const double t = (0.38 - u) / 0.76;
        if (t >= 0.0 && t <= 1.0 && std::abs(v) <= 0.3 * t) put(px, py, c);
      }
    }
  }

  int tile() const { return tile_; }

 private:
  RgbImage& img_;
  int x0_, y0_, tile_;
};

void paint_cell(Canvas& cv, const Cell& cell) {
  const int t = cv.tile();
  const Rgb col = color_rgb(static_cast<Color>(cell.color % kNumColors));
  switch (cell.kind()) {
    case Object::Unseen:
      break;
    case Object::Empty:
      cv.fill(0, 0, t, 1, kGridLine);
      cv.fill(0, 0, 1, t, kGridLine);
      break;
    case Object::Wall:
      cv.fill(0, 0, t, t, kWall);
      break;
    case Object::Floor:
      cv.fill(0, 0, t, t, {static_cast<std::uint8_t>(col[0] / 2), static_cast<std::uint8_t>(col[1] / 2),
                           static_cast<std::uint8_t>(col[2] / 2)});
      cv.fill(0, 0, t, 1, kGridLine);
      cv.fill(0, 0, 1, t, kGridLine);
      break;
    case Object::Door:
      if (cell.state == static_cast<std::uint8_t>(DoorState::Open)) {
        cv.frame(0, std::max(1, t / 8), col);
      } else {
        cv.fill(0, 0, t, t, col);
        if (cell.state == static_cast<std::uint8_t>(DoorState::Locked)) {
          cv.fill(t / 2 - t / 8, t / 4, t / 2 + t / 8 + (t < 8 ? 1 : 0), t / 2, kBlack);
        }
      }
      break;
    case Object::Key:
      cv.fill(t * 3 / 8, t / 8, t - t * 3 / 8, t - t / 8, col);
      break;
    case Object::Ball:
      cv.fill(t / 4, t / 4, t - t / 4, t - t / 4, col);
      break;
    case Object::Box:
      cv.fill(t / 8, t / 8, t - t / 8, t - t / 8, col);
      break;
    case Object::Goal:
      cv.fill(0, 0, t, t, col);
      break;
    case Object::Lava:
      cv.fill(0, 0, t, t, {255, 128, 0});
      break;
    case Object::Agent:
      cv.triangle(cell.state, {255, 0, 0});
      break;
  }
}

void append_chunk(std::vector<std::uint8_t>& out, const char* type, const std::vector<std::uint8_t>& body) {
  const auto len = static_cast<std::uint32_t>(body.size());
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(len >> s));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), body.begin(), body.end());
  const uLong crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + body.size()));
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(crc >> s));
}

}  // namespace

Rgb color_rgb(Color c) {
  switch (c) {
    case Color::Red: return {255, 0, 0};
    case Color::Green: return {0, 255, 0};
    case Color::Blue: return {0, 0, 255};
    case Color::Purple: return {112, 39, 195};
    case Color::Yellow: return {255, 255, 0};
    default: return {100, 100, 100};
  }
}

RgbImage render_rgb(const EncodedTensor& tensor, int tile_size) {
  if (tile_size < 1) throw UsageError("render_rgb: tile_size must be >= 1");
  RgbImage img;
  img.width = tensor.width * tile_size;
  img.height = tensor.height * tile_size;
  img.data.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);
  for (int y = 0; y < tensor.height; ++y) {
    for (int x = 0; x < tensor.width; ++x) {
      Canvas cv(img, x * tile_size, y * tile_size, tile_size);
      paint_cell(cv, tensor.at(x, y));
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

  std::vector<std::uint8_t> header;
  for (std::uint32_t v : {static_cast<std::uint32_t>(image.width), static_cast<std::uint32_t>(image.height)}) {
    for (int s = 24; s >= 0; s -= 8) header.push_back(static_cast<std::uint8_t>(v >> s));
  }
  header.insert(header.end(), {8, 2, 0, 0, 0});  // depth 8, RGB, deflate, no filter, no interlace
  append_chunk(out, "IHDR", header);

  const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * image.height);
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), image.data.begin() + static_cast<std::ptrdiff_t>(y * stride),
               image.data.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
  }
  uLongf packed_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_len);
  if (compress2(packed.data(), &packed_len, raw.data(), static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION) != Z_OK) {
    throw std::runtime_error("encode_png: deflate failed");
  }
  packed.resize(packed_len);
  append_chunk(out, "IDAT", packed);
  append_chunk(out, "IEND", {});
  return out;
}

void write_png(const std::string& path, const RgbImage& image) {
  const auto bytes = encode_png(image);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string dump_text(const EncodedTensor& tensor) {
  std::ostringstream os;
  os << tensor.width << ' ' << tensor.height << '\n';
  for (int y = 0; y < tensor.height; ++y) {
    for (int x = 0; x < tensor.width; ++x) {
      const Cell c = tensor.at(x, y);
      if (x) os << ' ';
      os << int(c.object) << ',' << int(c.color) << ',' << int(c.state);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace gridcurio
