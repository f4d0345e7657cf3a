#pragma once

#include <filesystem>

#include "trajsmooth/metrics.hpp"

namespace trajsmooth {

// Writes report.md plus one SVG line plot per (model, split, metric) into
// out_dir. Tables have one row per beta (baseline first) and one column per
// horizon; per-seed values are averaged and the lowest value per column is
// bolded. Output bytes are deterministic for a given table.
void write_report(const MetricsTable& merged, const std::filesystem::path& out_dir);

}  // namespace trajsmooth
