#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "substan/plots.hpp"

using namespace substan;
namespace fs = std::filesystem;

TEST_CASE("box statistics") {
  const auto s = plots::box_stats({1, 2, 3, 4, 5, 6, 7, 8, 100});
  CHECK(s.median == 5.0);
  CHECK(s.q1 == 3.0);
  CHECK(s.q3 == 7.0);
  CHECK(s.min == 1.0);
  CHECK(s.max == 8.0);
  REQUIRE(s.outliers.size() == 1);
  CHECK(s.outliers[0] == 100.0);
  const auto one = plots::box_stats({4});
  CHECK(one.median == 4.0);
  CHECK(one.q1 == 4.0);
}

TEST_CASE("png output") {
  ConfusionMatrix m;
  m.counts[0][0] = 5;
  m.counts[0][4] = 1;
  const auto img = plots::confusion_heatmap(m, "TEST", "A", "B");
  const fs::path path = fs::temp_directory_path() / "substan_plot_test.png";
  plots::write_png(path, img);
  std::ifstream in(path, std::ios::binary);
  char sig[8] = {};
  in.read(sig, 8);
  CHECK(std::string(sig + 1, 3) == "PNG");
  fs::remove(path);

  const auto box = plots::box_plot({{"ACL", {1, 2, 3}}, {"ICLR", {2, 3, 9}}}, "LENGTH");
  plots::write_png(path, box);
  CHECK(fs::file_size(path) > 100);
  fs::remove(path);
}
