#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "aqnn/dataset.hpp"
#include "aqnn/errors.hpp"
#include "aqnn/train.hpp"

using namespace aqnn;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("aqnn_data_test_" + name);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_csv parses rows, labels and optional header") {
  const fs::path path = temp_file("basic.csv");
  write_file(path,
             "MQ2,MQ9,MQ135,MQ137,MQ138,MG811,label\n"
             "120.5,88.2,240.1,95.0,110.3,410.7,2\n"
             "121.0,87.9,239.8,94.5,111.0,409.2,0\n");
  const Dataset ds = load_csv(path);
  REQUIRE(ds.size() == 2);
  CHECK(ds.samples[0].readings[0] == doctest::Approx(120.5));
  CHECK(ds.samples[0].readings[5] == doctest::Approx(410.7));
  CHECK(ds.samples[0].label == 2);
  CHECK(ds.samples[1].label == 0);
  CHECK(ds.provenance == Provenance::file);
  fs::remove(path);
}

TEST_CASE("load_csv works without a header line") {
  const fs::path path = temp_file("noheader.csv");
  write_file(path, "1,2,3,4,5,6,1\n7,8,9,10,11,12,3\n");
  CHECK(load_csv(path).size() == 2);
  fs::remove(path);
}

TEST_CASE("load_csv reports schema violations with line numbers") {
  const fs::path path = temp_file("bad.csv");

  SUBCASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_csv(temp_file("does_not_exist.csv")), io_error);
  }

  SUBCASE("wrong column count") {
    write_file(path, "1,2,3,4,5,6,0\n1,2,3,4,5,6\n");
    try {
      load_csv(path);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.line == 2);
      CHECK(std::string(e.what()).find("expected 7 values") != std::string::npos);
    }
  }

  SUBCASE("non-numeric reading") {
    write_file(path, "1,2,bogus,4,5,6,0\n");
    CHECK_THROWS_AS(load_csv(path), parse_error);
  }

  SUBCASE("label out of range") {
    write_file(path, "1,2,3,4,5,6,7\n");
    try {
      load_csv(path);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(std::string(e.what()).find("outside 0..3") != std::string::npos);
    }
  }

  SUBCASE("non-integer label") {
    write_file(path, "1,2,3,4,5,6,1.5\n");
    CHECK_THROWS_AS(load_csv(path), parse_error);
  }

  SUBCASE("empty file") {
    write_file(path, "");
    CHECK_THROWS_AS(load_csv(path), parse_error);
  }

  fs::remove(path);
}

TEST_CASE("load_unlabeled_csv guards the label column") {
  const fs::path path = temp_file("unlabeled.csv");
  write_file(path, "1,2,3,4,5,6\n6,5,4,3,2,1\n");
  CHECK(load_unlabeled_csv(path).size() == 2);

  const fs::path labeled = temp_file("labeled7.csv");
  write_file(labeled, "1,2,3,4,5,6,0\n");
  CHECK_THROWS_AS(load_unlabeled_csv(labeled), parse_error);
  CHECK(load_unlabeled_csv(labeled, /*ignore_labels=*/true).size() == 1);

  fs::remove(path);
  fs::remove(labeled);
}

TEST_CASE("CSV round-trip preserves every value") {
  const Dataset ds = synth_generate(25, 91);
  const fs::path path = temp_file("roundtrip.csv");
  save_csv(ds, path);
  const Dataset back = load_csv(path);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.samples[i].label == ds.samples[i].label);
    for (int c = 0; c < kNumSensors; ++c)
      CHECK(back.samples[i].readings[static_cast<std::size_t>(c)] ==
            ds.samples[i].readings[static_cast<std::size_t>(c)]);  // %.9g round-trips exactly
  }
  fs::remove(path);
}

TEST_CASE("fit_normalizer") {
  SUBCASE("single sample gets unit std by the degenerate-column rule") {
    Dataset ds;
    ds.samples.push_back({{1, 2, 3, 4, 5, 6}, 0});
    const NormStats stats = fit_normalizer(ds);
    for (int c = 0; c < kNumSensors; ++c) {
      CHECK(stats.mean[static_cast<std::size_t>(c)] == doctest::Approx(c + 1.0));
      CHECK(stats.std[static_cast<std::size_t>(c)] == 1.0f);
    }
  }

  SUBCASE("column {1,3} has mean 2 and population std 1") {
    Dataset ds;
    ds.samples.push_back({{1, 1, 1, 1, 1, 1}, 0});
    ds.samples.push_back({{3, 3, 3, 3, 3, 3}, 1});
    const NormStats stats = fit_normalizer(ds);
    CHECK(stats.mean[0] == doctest::Approx(2.0));
    CHECK(stats.std[0] == doctest::Approx(1.0));
  }

  SUBCASE("constant columns do not blow up") {
    Dataset ds;
    for (int i = 0; i < 10; ++i) ds.samples.push_back({{5, 5, 5, 5, 5, 5}, 0});
    const NormStats stats = fit_normalizer(ds);
    for (float s : stats.std) CHECK(s == 1.0f);
    const FeatureMap z = apply_normalizer(ds.samples[0], stats);
    for (float v : z.values) CHECK(v == 0.0f);
  }

  SUBCASE("empty dataset is rejected") {
    CHECK_THROWS_AS(fit_normalizer(Dataset{}), std::invalid_argument);
  }
}

TEST_CASE("apply_normalizer maps mean to zero and mean+std to one") {
  const Dataset ds = synth_generate(50, 3);
  const NormStats stats = fit_normalizer(ds);

  SensorSample at_mean;
  SensorSample at_mean_plus_std;
  for (int c = 0; c < kNumSensors; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    at_mean.readings[ci] = stats.mean[ci];
    at_mean_plus_std.readings[ci] = stats.mean[ci] + stats.std[ci];
  }
  const FeatureMap zero = apply_normalizer(at_mean, stats);
  REQUIRE(zero.length == 6);
  REQUIRE(zero.channels == 1);
  for (float v : zero.values) CHECK(v == doctest::Approx(0.0));
  for (float v : apply_normalizer(at_mean_plus_std, stats).values)
    CHECK(v == doctest::Approx(1.0));

  // Round trip: x = z * std + mean recovers the raw reading.
  const SensorSample& raw = ds.samples[7];
  const FeatureMap z = apply_normalizer(raw, stats);
  for (int c = 0; c < kNumSensors; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const float recovered = z.values[ci] * stats.std[ci] + stats.mean[ci];
    CHECK(recovered == doctest::Approx(raw.readings[ci]).epsilon(1e-5));
  }
}

TEST_CASE("normalized training split has zero mean and unit std") {
  const Dataset ds = synth_generate(300, 11);
  const Split split = shuffle_split(ds, SplitSpec{});
  const NormStats stats = fit_normalizer(split.train);
  const TrainingSet set = normalize_dataset(split.train, stats);

  for (int c = 0; c < kNumSensors; ++c) {
    double sum = 0.0, sq = 0.0;
    for (const FeatureMap& fm : set.inputs) {
      sum += fm.values[static_cast<std::size_t>(c)];
      sq += static_cast<double>(fm.values[static_cast<std::size_t>(c)]) *
            fm.values[static_cast<std::size_t>(c)];
    }
    const double n = static_cast<double>(set.size());
    const double mean = sum / n;
    const double std_dev = std::sqrt(sq / n - mean * mean);
    CHECK(std::fabs(mean) < 1e-5);
    CHECK(std::fabs(std_dev - 1.0) < 1e-3);
  }
}

TEST_CASE("shuffle_split sizes follow floor arithmetic") {
  SUBCASE("n=1845 with 0.7/0.2/0.1 gives 1291/369/185") {
    const Dataset ds = synth_generate(462, 1);  // 1848 samples; trim to 1845
    Dataset trimmed;
    trimmed.samples.assign(ds.samples.begin(), ds.samples.begin() + 1845);
    const Split split = shuffle_split(trimmed, SplitSpec{});
    CHECK(split.train.size() == 1291);
    CHECK(split.val.size() == 369);
    CHECK(split.test.size() == 185);
  }

  SUBCASE("n=10 gives 7/2/1") {
    Dataset ds = synth_generate(3, 2);
    ds.samples.resize(10);
    const Split split = shuffle_split(ds, SplitSpec{});
    CHECK(split.train.size() == 7);
    CHECK(split.val.size() == 2);
    CHECK(split.test.size() == 1);
  }
}

TEST_CASE("shuffle_split is a seeded partition of the input") {
  const Dataset ds = synth_generate(40, 17);

  SUBCASE("same seed twice gives identical partitions") {
    const Split a = shuffle_split(ds, SplitSpec{0.7, 0.2, 0.1, 99});
    const Split b = shuffle_split(ds, SplitSpec{0.7, 0.2, 0.1, 99});
    auto equal = [](const Dataset& x, const Dataset& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x.samples[i].label != y.samples[i].label) return false;
        if (x.samples[i].readings != y.samples[i].readings) return false;
      }
      return true;
    };
    CHECK(equal(a.train, b.train));
    CHECK(equal(a.val, b.val));
    CHECK(equal(a.test, b.test));
  }

  SUBCASE("the three splits cover the input as a multiset") {
    const Split split = shuffle_split(ds, SplitSpec{0.7, 0.2, 0.1, 5});
    CHECK(split.train.size() + split.val.size() + split.test.size() == ds.size());

    auto key = [](const SensorSample& s) {
      std::string k;
      for (float r : s.readings) k += std::to_string(r) + "|";
      k += std::to_string(*s.label);
      return k;
    };
    std::map<std::string, int> original, recombined;
    for (const SensorSample& s : ds.samples) ++original[key(s)];
    for (const Dataset* part : {&split.train, &split.val, &split.test})
      for (const SensorSample& s : part->samples) ++recombined[key(s)];
    CHECK(original == recombined);
  }

  SUBCASE("invalid ratios are rejected") {
    CHECK_THROWS_AS(shuffle_split(ds, SplitSpec{0.7, 0.2, 0.2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(shuffle_split(ds, SplitSpec{1.0, 0.0, 0.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(shuffle_split(Dataset{}, SplitSpec{}), std::invalid_argument);
  }
}

TEST_CASE("class_distribution") {
  SUBCASE("balanced synthetic set") {
    const ClassCounts counts = class_distribution(synth_generate(100, 7));
    for (long c : counts.counts) CHECK(c == 100);
    CHECK(counts.total() == 400);
    CHECK_FALSE(counts.has_empty_class);
  }

  SUBCASE("an empty class raises the warning flag") {
    Dataset ds;
    ds.samples.push_back({{1, 2, 3, 4, 5, 6}, 0});
    ds.samples.push_back({{1, 2, 3, 4, 5, 6}, 1});
    const ClassCounts counts = class_distribution(ds);
    CHECK(counts.has_empty_class);
    CHECK(counts.counts[2] == 0);
  }

  SUBCASE("unlabeled samples are rejected") {
    Dataset ds;
    ds.samples.push_back({{1, 2, 3, 4, 5, 6}, std::nullopt});
    CHECK_THROWS_AS(class_distribution(ds), std::invalid_argument);
  }
}

TEST_CASE("synth_generate") {
  SUBCASE("produces a balanced labeled dataset") {
    const Dataset ds = synth_generate(100, 7);
    CHECK(ds.size() == 400);
    CHECK(ds.provenance == Provenance::synthetic);
    const ClassCounts counts = class_distribution(ds);
    for (long c : counts.counts) CHECK(c == 100);
  }

  SUBCASE("same seed reproduces the dataset bitwise") {
    const Dataset a = synth_generate(50, 123);
    const Dataset b = synth_generate(50, 123);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].readings == b.samples[i].readings);
  }

  SUBCASE("class means are separated by at least 3 within-class stds") {
    const Dataset ds = synth_generate(400, 19);
    // Per-class per-channel mean and std.
    double mean[kNumClasses][kNumSensors] = {};
    double var[kNumClasses][kNumSensors] = {};
    for (const SensorSample& s : ds.samples)
      for (int c = 0; c < kNumSensors; ++c)
        mean[*s.label][c] += s.readings[static_cast<std::size_t>(c)] / 400.0;
    for (const SensorSample& s : ds.samples)
      for (int c = 0; c < kNumSensors; ++c) {
        const double d = s.readings[static_cast<std::size_t>(c)] - mean[*s.label][c];
        var[*s.label][c] += d * d / 400.0;
      }
    for (int a = 0; a < kNumClasses; ++a)
      for (int b = a + 1; b < kNumClasses; ++b) {
        double best_separation = 0.0;
        for (int c = 0; c < kNumSensors; ++c) {
          const double pooled = std::sqrt(std::max(var[a][c], var[b][c]));
          best_separation =
              std::max(best_separation, std::fabs(mean[a][c] - mean[b][c]) / pooled);
        }
        CHECK(best_separation >= 3.0);  // at least one discriminating channel per pair
      }
  }

  SUBCASE("n_per_class must be positive") {
    CHECK_THROWS_AS(synth_generate(0, 1), std::invalid_argument);
  }
}
