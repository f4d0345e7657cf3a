#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajsmooth/scene.hpp"

namespace trajsmooth {

enum class SplitMethod { Random, Critical };

std::string to_string(SplitMethod m);
SplitMethod split_method_from_string(const std::string& s);

struct DataSplit {
  std::vector<int> train, val, test;  // indices into SceneSet::scenes
  SplitMethod method{SplitMethod::Random};
  std::uint64_t seed{0};
};

// Seeded permutation; val/test sizes are the rounded fraction counts and the
// remainder goes to train. Fractions must sum to 1 within 1e-9.
DataSplit split_random(const SceneSet& set, double train_frac, double val_frac,
                       double test_frac, std::uint64_t seed);

// Criticality score is -gap_size for accepted scenes and +gap_size for
// rejected ones; the top test_fraction of each label class (ties broken by
// ascending scene_id) goes to test, the rest to train. Requires gap_meta on
// every scene.
DataSplit split_critical(const SceneSet& set, double test_fraction);

// Throws ValidationError unless train/val/test are pairwise disjoint and
// cover the set.
void validate(const DataSplit& split, const SceneSet& set);

}  // namespace trajsmooth
