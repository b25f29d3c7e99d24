#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "substan/metrics.hpp"

namespace substan::plots {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
};

// 8-bit RGB raster with a built-in 5x7 bitmap font (upper-case ASCII,
// digits and basic punctuation; lower case is drawn as upper case).
class Image {
 public:
  Image(int width, int height, Color background = {255, 255, 255});

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint8_t>& pixels() const { return rgb_; }

  void set(int x, int y, Color c);
  void fill_rect(int x, int y, int w, int h, Color c);
  void hline(int x0, int x1, int y, Color c);
  void vline(int x, int y0, int y1, Color c);
  void text(int x, int y, const std::string& s, Color c, int scale = 1);
  static int text_width(const std::string& s, int scale = 1) { return 6 * scale * static_cast<int>(s.size()); }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> rgb_;
};

// Throws DataError when the file cannot be written.
void write_png(const std::filesystem::path& path, const Image& image);

// Row-normalized confusion matrix, rows = first labeling.
Image confusion_heatmap(const ConfusionMatrix& m, const std::string& title,
                        const std::string& row_name, const std::string& col_name);

struct BoxStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;  // whiskers at 1.5 IQR
  std::vector<double> outliers;
};

// Quartiles by linear interpolation between order statistics.
BoxStats box_stats(std::vector<double> values);

Image box_plot(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
               const std::string& title);

}  // namespace substan::plots
