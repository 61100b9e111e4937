#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include <taskdict/errors.hpp>
#include <taskdict/halftone.hpp>
#include <taskdict/image.hpp>
#include <taskdict/patches.hpp>
#include <taskdict/sampler.hpp>

#include "../support/test_images.hpp"
#include "../support/test_util.hpp"

using namespace taskdict;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("patch extraction counts and contents") {
  Rng rng(1);
  PatchConfig cfg;
  cfg.side = 10;
  cfg.stride = 1;

  SUBCASE("10x10 image yields exactly its flattening") {
    const Image img = taskdict::testing::synthetic_image(rng, 10, 10);
    const PatchSet set = extract_patches(img, cfg);
    REQUIRE(set.patches.cols() == 1);
    CHECK(set.positions[0] == std::pair<int, int>{0, 0});
    for (Index r = 0; r < 10; ++r) {
      for (Index c = 0; c < 10; ++c) {
        CHECK(set.patches(r * 10 + c, 0) == img.pix(r, c));
      }
    }
  }

  SUBCASE("12x12 image yields 9 patches") {
    const Image img = taskdict::testing::synthetic_image(rng, 12, 12);
    CHECK(extract_patches(img, cfg).patches.cols() == 9);
  }

  SUBCASE("stride changes the count formula") {
    const Image img = taskdict::testing::synthetic_image(rng, 32, 47);
    cfg.side = 8;
    cfg.stride = 3;
    const Index rows = (32 - 8) / 3 + 1;
    const Index cols = (47 - 8) / 3 + 1;
    CHECK(extract_patches(img, cfg).patches.cols() == rows * cols);
  }

  SUBCASE("constant image centers to zero patches") {
    Image img(16, 16);
    img.pix.setConstant(0.4);
    cfg.side = 8;
    cfg.zero_mean = true;
    cfg.unit_norm = true;
    const PatchSet set = extract_patches(img, cfg);
    CHECK(set.patches.isZero(0.0));
  }

  SUBCASE("too-small image is rejected") {
    const Image img = taskdict::testing::synthetic_image(rng, 6, 20);
    cfg.side = 10;
    CHECK_THROWS_AS(extract_patches(img, cfg), std::invalid_argument);
  }
}

TEST_CASE("normalize") {
  Rng rng(2);
  SUBCASE("constant vector maps to zero") {
    CHECK(normalize(Vector::Constant(9, 3.3)).isZero(0.0));
  }
  SUBCASE("already-normalized vectors are fixed points") {
    Vector v = taskdict::testing::random_vector(rng, 10);
    const Vector once = normalize(v);
    const Vector twice = normalize(once);
    CHECK((twice - once).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  SUBCASE("output mean is 0 and norm is 0 or 1") {
    for (int i = 0; i < 50; ++i) {
      const Vector v = taskdict::testing::random_vector(rng, 12, 5.0);
      const Vector n = normalize(v);
      CHECK(std::abs(n.mean()) <= 1e-12);
      const double norm = n.norm();
      CHECK((norm == 0.0 || std::abs(norm - 1.0) < 1e-12));
    }
  }
}

TEST_CASE("shift augmentation") {
  Rng rng(3);

  SUBCASE("all-zero image shifts to all-zero images") {
    const auto shifted = shift_augment(Image(8, 8));
    for (const auto& img : shifted) CHECK(img.pix.isZero(0.0));
  }

  SUBCASE("a single bright pixel relocates") {
    Image img(9, 9);
    img.pix(4, 4) = 1.0;
    const auto s = shift_augment(img);
    CHECK(s[0].pix(4, 4) == 1.0);  // original
    CHECK(s[1].pix(3, 4) == 1.0);  // up
    CHECK(s[2].pix(5, 4) == 1.0);  // down
    CHECK(s[3].pix(4, 3) == 1.0);  // left
    CHECK(s[4].pix(4, 5) == 1.0);  // right
    CHECK(s[1].pix.sum() == 1.0);
  }

  SUBCASE("down of up loses exactly the boundary row") {
    for (int trial = 0; trial < 10; ++trial) {
      const Image img = taskdict::testing::synthetic_image(rng, 12, 12);
      const Image up = shift_augment(img)[1];
      const Image back = shift_augment(up)[2];
      CHECK(back.pix.row(0).isZero(0.0));
      CHECK((back.pix.bottomRows(11) - img.pix.bottomRows(11)).lpNorm<Eigen::Infinity>() ==
            0.0);
    }
  }

  SUBCASE("tiny images are rejected") {
    CHECK_THROWS_AS(shift_augment(Image(2, 5)), std::invalid_argument);
  }
}

TEST_CASE("floyd-steinberg") {
  SUBCASE("all ones stays all ones") {
    Image img(16, 16);
    img.pix.setConstant(1.0);
    CHECK(floyd_steinberg(img).pix.isConstant(1.0));
  }
  SUBCASE("all zeros stays all zeros") {
    CHECK(floyd_steinberg(Image(16, 16)).pix.isZero(0.0));
  }
  SUBCASE("constant 0.5 keeps its mean within 0.02") {
    Image img(64, 64);
    img.pix.setConstant(0.5);
    const Image binary = floyd_steinberg(img);
    CHECK(std::abs(binary.pix.mean() - 0.5) < 0.02);
    // Outputs are exactly binary.
    for (Index r = 0; r < 64; ++r) {
      for (Index c = 0; c < 64; ++c) {
        CHECK((binary.pix(r, c) == 0.0 || binary.pix(r, c) == 1.0));
      }
    }
  }
  SUBCASE("density is preserved on synthetic images") {
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
      const Image img = taskdict::testing::synthetic_image(rng, 96, 96);
      const Image binary = floyd_steinberg(img);
      CHECK(std::abs(binary.pix.mean() - img.pix.mean()) < 0.02);
    }
  }
  SUBCASE("out-of-range values are clamped and counted") {
    Image img(4, 4);
    img.pix.setConstant(0.5);
    img.pix(0, 0) = 1.5;
    img.pix(3, 3) = -0.25;
    long clamped = 0;
    floyd_steinberg(img, &clamped);
    CHECK(clamped == 2);
  }
}

TEST_CASE("image reconstruction from patches") {
  Rng rng(5);

  SUBCASE("identical constant patches give a constant image") {
    PatchConfig cfg;
    cfg.side = 4;
    Image img(10, 10);
    img.pix.setConstant(0.6);
    const PatchSet set = extract_patches(img, cfg);
    const Image rec = reconstruct_image(set.patches, set.positions, 10, 10, 4);
    CHECK(rec.pix.isApproxToConstant(0.6, 1e-12));
  }

  SUBCASE("round trip is exact at stride 1") {
    const Image img = taskdict::testing::synthetic_image(rng, 24, 30);
    PatchConfig cfg;
    cfg.side = 8;
    cfg.stride = 1;
    const PatchSet set = extract_patches(img, cfg);
    const Image rec = reconstruct_image(set.patches, set.positions, 24, 30, 8);
    CHECK((rec.pix - img.pix).lpNorm<Eigen::Infinity>() < 1e-12);
  }

  SUBCASE("non-overlapping tiling reproduces the image too") {
    const Image img = taskdict::testing::synthetic_image(rng, 24, 24);
    PatchConfig cfg;
    cfg.side = 8;
    cfg.stride = 8;
    const PatchSet set = extract_patches(img, cfg);
    CHECK(set.patches.cols() == 9);
    const Image rec = reconstruct_image(set.patches, set.positions, 24, 24, 8);
    CHECK((rec.pix - img.pix).lpNorm<Eigen::Infinity>() < 1e-12);
  }

  SUBCASE("uncovered pixels are an error") {
    const Image img = taskdict::testing::synthetic_image(rng, 25, 25);
    PatchConfig cfg;
    cfg.side = 8;
    cfg.stride = 8;  // 25 is not divisible: the last row/column is uncovered
    const PatchSet set = extract_patches(img, cfg);
    CHECK_THROWS_AS(reconstruct_image(set.patches, set.positions, 25, 25, 8), DataError);
  }
}

TEST_CASE("pgm round trip") {
  Rng rng(6);
  const Image img = taskdict::testing::synthetic_image(rng, 40, 56);
  const std::string path = temp_path("taskdict_test_roundtrip.pgm");
  write_pgm(img, path);
  const Image back = read_pgm(path);
  REQUIRE(back.height() == 40);
  REQUIRE(back.width() == 56);
  // 8-bit quantization bounds the error by half a level.
  CHECK((back.pix - img.pix).lpNorm<Eigen::Infinity>() <= 0.5 / 255.0 + 1e-12);
  write_pgm(back, path + "2");
  const Image again = read_pgm(path + "2");
  CHECK(again.pix == back.pix);  // quantization is idempotent
  std::remove(path.c_str());
  std::remove((path + "2").c_str());

  CHECK_THROWS_AS(read_pgm("/nonexistent/definitely_missing.pgm"), DataError);
}

TEST_CASE("sample stream") {
  Rng rng(7);
  std::vector<Sample> data(3);
  for (int i = 0; i < 3; ++i) data[static_cast<std::size_t>(i)].label = i;

  SUBCASE("one epoch is a permutation") {
    SampleStream s = stream(data, 42);
    std::multiset<int> seen;
    for (int i = 0; i < 3; ++i) seen.insert(s.next().label);
    CHECK(seen == std::multiset<int>{0, 1, 2});
  }

  SUBCASE("equal seeds give identical sequences") {
    SampleStream a = stream(data, 9);
    SampleStream b = stream(data, 9);
    for (int i = 0; i < 50; ++i) CHECK(a.next().label == b.next().label);
  }

  SUBCASE("every sample appears exactly once per epoch") {
    std::vector<Sample> bigger(17);
    for (int i = 0; i < 17; ++i) bigger[static_cast<std::size_t>(i)].label = i;
    SampleStream s = stream(bigger, 5);
    for (int epoch = 0; epoch < 20; ++epoch) {
      std::set<int> seen;
      for (int i = 0; i < 17; ++i) seen.insert(s.next().label);
      CHECK(seen.size() == 17);
    }
  }

  SUBCASE("positions are uniform over many epochs") {
    std::vector<Sample> five(5);
    for (int i = 0; i < 5; ++i) five[static_cast<std::size_t>(i)].label = i;
    SampleStream s = stream(five, 11);
    // counts[sample][position]
    int counts[5][5] = {};
    const int epochs = 2000;
    for (int e = 0; e < epochs; ++e) {
      for (int pos = 0; pos < 5; ++pos) ++counts[s.next().label][pos];
    }
    const double expected = epochs / 5.0;
    for (auto& row : counts) {
      for (int c : row) {
        CHECK(static_cast<double>(c) > 0.7 * expected);
        CHECK(static_cast<double>(c) < 1.3 * expected);
      }
    }
  }

  SUBCASE("empty dataset is rejected") {
    CHECK_THROWS_AS(stream(std::vector<Sample>{}, 1), DataError);
  }
}

TEST_CASE("manifest parsing") {
  const std::string path = temp_path("taskdict_test_manifest.txt");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("# comment line\n", f);
    std::fputs("a.pgm 3\n", f);
    std::fputs("\n", f);
    std::fputs("/abs/b.pgm\n", f);
    std::fclose(f);
  }
  const auto entries = read_manifest(path);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].has_label);
  CHECK(entries[0].label == 3);
  CHECK(entries[0].path.find("a.pgm") != std::string::npos);
  CHECK(entries[1].path == "/abs/b.pgm");
  CHECK(!entries[1].has_label);
  std::remove(path.c_str());
}
