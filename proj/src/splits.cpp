#include "trajsmooth/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "trajsmooth/errors.hpp"
#include "trajsmooth/rng.hpp"

namespace trajsmooth {

std::string to_string(SplitMethod m) {
  return m == SplitMethod::Random ? "random" : "critical";
}

SplitMethod split_method_from_string(const std::string& s) {
  if (s == "random") return SplitMethod::Random;
  if (s == "critical") return SplitMethod::Critical;
  throw ParseError("unknown split method '" + s + "'");
}

DataSplit split_random(const SceneSet& set, double train_frac, double val_frac,
                       double test_frac, std::uint64_t seed) {
  if (train_frac < 0.0 || val_frac < 0.0 || test_frac < 0.0) {
    throw ConfigError("split fractions must be nonnegative");
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  const int n = static_cast<int>(set.scenes.size());
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(perm);

  long n_val = std::llround(val_frac * n);
  long n_test = std::llround(test_frac * n);
  if (n_val + n_test > n) n_test = n - n_val;  // rounding corner; train keeps the remainder
  const long n_train = n - n_val - n_test;

  DataSplit split;
  split.method = SplitMethod::Random;
  split.seed = seed;
  split.train.assign(perm.begin(), perm.begin() + n_train);
  split.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  split.test.assign(perm.begin() + n_train + n_val, perm.end());
  return split;
}

DataSplit split_critical(const SceneSet& set, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  struct Entry {
    double score;
    int scene_id;
    int index;
  };
  std::vector<Entry> accepted, rejected;
  for (int i = 0; i < static_cast<int>(set.scenes.size()); ++i) {
    const auto& scene = set.scenes[static_cast<std::size_t>(i)];
    if (!scene.gap_meta) {
      throw ValidationError("scene " + std::to_string(scene.scene_id) +
                            " lacks gap metadata; critical split needs it");
    }
    const auto& g = *scene.gap_meta;
    const double score = g.accepted ? -g.gap_size : g.gap_size;
    (g.accepted ? accepted : rejected).push_back({score, scene.scene_id, i});
  }

  DataSplit split;
  split.method = SplitMethod::Critical;
  split.seed = 0;
  auto take = [&](std::vector<Entry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.scene_id < b.scene_id;
    });
    const long n_test = std::llround(test_fraction * static_cast<double>(entries.size()));
    for (long i = 0; i < static_cast<long>(entries.size()); ++i) {
      (i < n_test ? split.test : split.train)
          .push_back(entries[static_cast<std::size_t>(i)].index);
    }
  };
  take(accepted);
  take(rejected);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void validate(const DataSplit& split, const SceneSet& set) {
  const int n = static_cast<int>(set.scenes.size());
  std::set<int> seen;
  auto check = [&](const std::vector<int>& part, const char* name) {
    for (const int i : part) {
      if (i < 0 || i >= n) {
        throw ValidationError(std::string(name) + " index out of range");
      }
      if (!seen.insert(i).second) {
        throw ValidationError("split parts are not disjoint");
      }
    }
  };
  check(split.train, "train");
  check(split.val, "val");
  check(split.test, "test");
  if (static_cast<int>(seen.size()) != n) {
    throw ValidationError("split does not cover the scene set");
  }
}

}  // namespace trajsmooth
