#include "substan/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <png.h>

#include "substan/errors.hpp"

namespace substan::plots {

namespace {

struct Glyph {
  char c;
  std::array<std::uint8_t, 7> rows;  // low 5 bits, MSB = leftmost column
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}}, {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}}, {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}}, {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}}, {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}}, {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}}, {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}}, {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}}, {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}}, {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}}, {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}}, {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}}, {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}}, {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}}, {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}}, {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}}, {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}}, {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}}, {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}}, {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}}, {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}},
    {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}}, {'#', {0x0A, 0x0A, 0x1F, 0x0A, 0x1F, 0x0A, 0x0A}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}}, {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
};

const Glyph* glyph(char c) {
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  for (const auto& g : kFont) {
    if (g.c == c) return &g;
  }
  return nullptr;
}

constexpr Color kBlack{0, 0, 0};
constexpr Color kGrid{200, 200, 200};

std::string format(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

Image::Image(int width, int height, Color background)
    : width_(width), height_(height), rgb_(static_cast<std::size_t>(width * height) * 3) {
  fill_rect(0, 0, width, height, background);
}

void Image::set(int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  const auto i = static_cast<std::size_t>(y * width_ + x) * 3;
  rgb_[i] = c.r;
  rgb_[i + 1] = c.g;
  rgb_[i + 2] = c.b;
}

void Image::fill_rect(int x, int y, int w, int h, Color c) {
  for (int yy = y; yy < y + h; ++yy) {
    for (int xx = x; xx < x + w; ++xx) set(xx, yy, c);
  }
}

void Image::hline(int x0, int x1, int y, Color c) {
  for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, c);
}

void Image::vline(int x, int y0, int y1, Color c) {
  for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) set(x, y, c);
}

void Image::text(int x, int y, const std::string& s, Color c, int scale) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Glyph* g = glyph(s[k]);
    if (!g) continue;
    const int ox = x + static_cast<int>(k) * 6 * scale;
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (g->rows[row] & (0x10 >> col)) fill_rect(ox + col * scale, y + row * scale, scale, scale, c);
      }
    }
  }
}

void write_png(const std::filesystem::path& path, const Image& image) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw DataError("cannot write image " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DataError("PNG encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto& px = image.pixels();
  for (int y = 0; y < image.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(px.data() + static_cast<std::size_t>(y * image.width()) * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

Image confusion_heatmap(const ConfusionMatrix& m, const std::string& title,
                        const std::string& row_name, const std::string& col_name) {
  constexpr int kCell = 84;
  constexpr int kLeft = 110;
  constexpr int kTop = 50;
  const int n = kNumTokenClasses;
  Image img(kLeft + n * kCell + 20, kTop + n * kCell + 60);
  img.text(10, 10, title, kBlack, 2);
  const auto norm = m.normalized();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double v = norm[r][c];
      const auto shade = static_cast<std::uint8_t>(255.0 - 200.0 * v);
      const Color fill{shade, shade, 255};
      const int x = kLeft + c * kCell;
      const int y = kTop + r * kCell;
      img.fill_rect(x, y, kCell - 2, kCell - 2, fill);
      const std::string label = format(v, 2);
      img.text(x + (kCell - Image::text_width(label)) / 2, y + kCell / 2 - 4, label,
               v > 0.6 ? Color{255, 255, 255} : kBlack);
    }
    img.text(5, kTop + r * kCell + kCell / 2 - 4,
             std::string(to_string(static_cast<TokenClass>(r))), kBlack);
  }
  for (int c = 0; c < n; ++c) {
    const std::string label(to_string(static_cast<TokenClass>(c)));
    img.text(kLeft + c * kCell + 2, kTop + n * kCell + 6, label, kBlack);
  }
  img.text(kLeft, kTop + n * kCell + 30, "ROWS: " + row_name + "  COLS: " + col_name, kBlack);
  return img;
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.min = s.q1;
  s.max = s.q3;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
    } else {
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
  }
  return s;
}

Image box_plot(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
               const std::string& title) {
  constexpr int kLeft = 70;
  constexpr int kTop = 50;
  constexpr int kPlotH = 300;
  constexpr int kSlot = 120;
  const int width = kLeft + std::max<int>(1, static_cast<int>(groups.size())) * kSlot + 20;
  Image img(width, kTop + kPlotH + 50);
  img.text(10, 10, title, kBlack, 2);

  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const auto& [name, v] : groups) {
    for (double x : v) {
      if (!any) lo = hi = x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      any = true;
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const auto ypos = [&](double v) {
    return kTop + kPlotH - static_cast<int>(std::lround((v - lo) / (hi - lo) * kPlotH));
  };
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    const int y = ypos(v);
    img.hline(kLeft, width - 10, y, kGrid);
    img.text(5, y - 3, format(v, 0), kBlack);
  }
  img.vline(kLeft, kTop, kTop + kPlotH, kBlack);

  const Color box{120, 160, 230};
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto s = box_stats(groups[g].second);
    const int cx = kLeft + static_cast<int>(g) * kSlot + kSlot / 2;
    if (!groups[g].second.empty()) {
      img.vline(cx, ypos(s.min), ypos(s.q1), kBlack);
      img.vline(cx, ypos(s.q3), ypos(s.max), kBlack);
      img.hline(cx - 15, cx + 15, ypos(s.min), kBlack);
      img.hline(cx - 15, cx + 15, ypos(s.max), kBlack);
      img.fill_rect(cx - 30, ypos(s.q3), 61, ypos(s.q1) - ypos(s.q3) + 1, box);
      img.hline(cx - 30, cx + 30, ypos(s.median), kBlack);
      for (double o : s.outliers) img.fill_rect(cx - 2, ypos(o) - 2, 5, 5, kBlack);
    }
    const std::string& name = groups[g].first;
    img.text(cx - Image::text_width(name) / 2, kTop + kPlotH + 12, name, kBlack);
  }
  return img;
}

}  // namespace substan::plots
