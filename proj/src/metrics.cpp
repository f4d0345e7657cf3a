#include "trajsmooth/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

void check_horizon(const Eigen::Matrix2Xd& pred, const Eigen::Matrix2Xd& gt, int h) {
  if (h < 1) throw ValidationError("horizon step must be >= 1");
  if (pred.cols() < h || gt.cols() < h) {
    throw ValidationError("horizon exceeds trajectory length");
  }
}
}  // namespace

double fde(const Eigen::Matrix2Xd& pred, const Eigen::Matrix2Xd& gt, int h) {
  check_horizon(pred, gt, h);
  return (pred.col(h - 1) - gt.col(h - 1)).norm();
}

double ade(const Eigen::Matrix2Xd& pred, const Eigen::Matrix2Xd& gt, int h) {
  check_horizon(pred, gt, h);
  double total = 0.0;
  for (int s = 0; s < h; ++s) total += (pred.col(s) - gt.col(s)).norm();
  return total / h;
}

double kde_nll(std::span<const Eigen::Matrix2Xd> samples, const Eigen::Matrix2Xd& gt, int h,
               const KdeBandwidth& bandwidth) {
  const std::size_t n = samples.size();
  if (n == 0) throw ValidationError("kde_nll: needs at least one sample");
  if (h < 1 || gt.cols() < h) throw ValidationError("kde_nll: bad horizon");
  for (const auto& s : samples) {
    if (s.cols() < h) throw ValidationError("kde_nll: sample shorter than horizon");
  }

  double total = 0.0;
  for (int step = 0; step < h; ++step) {
    // per-coordinate bandwidth
    double hx, hy;
    if (bandwidth.rule == KdeBandwidth::Rule::Fixed) {
      hx = hy = bandwidth.fixed_value;
    } else {
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (const auto& s : samples) mean += s.col(step);
      mean /= static_cast<double>(n);
      Eigen::Vector2d ss = Eigen::Vector2d::Zero();
      for (const auto& s : samples) {
        const Eigen::Vector2d d = s.col(step) - mean;
        ss += d.cwiseProduct(d);
      }
      const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
      const Eigen::Vector2d sd = (ss / denom).cwiseSqrt();
      const double scott = std::pow(static_cast<double>(n), -1.0 / 6.0);
      hx = std::max(scott * sd(0), bandwidth.floor);
      hy = std::max(scott * sd(1), bandwidth.floor);
    }

    // stable log of the mixture density at gt
    const double log_norm =
        -kLog2Pi - std::log(hx) - std::log(hy) - std::log(static_cast<double>(n));
    double max_expo = -std::numeric_limits<double>::infinity();
    std::vector<double> expos;
    expos.reserve(n);
    for (const auto& s : samples) {
      const double dx = (gt(0, step) - s(0, step)) / hx;
      const double dy = (gt(1, step) - s(1, step)) / hy;
      const double e = -0.5 * (dx * dx + dy * dy);
      expos.push_back(e);
      max_expo = std::max(max_expo, e);
    }
    double acc = 0.0;
    for (const double e : expos) acc += std::exp(e - max_expo);
    total += -(log_norm + max_expo + std::log(acc));
  }
  return total / h;
}

namespace {

void check_labels(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw ValidationError("auc: scores and labels must align and be nonempty");
  }
  bool has_pos = false, has_neg = false;
  for (const std::uint8_t l : labels) (l != 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw ValidationError("auc: needs at least one positive and one negative label");
  }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_labels(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // average ranks over ties, then the Mann-Whitney statistic
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  for (const std::uint8_t l : labels) (l != 0 ? n_pos : n_neg) += 1;
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_trapezoid(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_labels(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double n_pos = 0, n_neg = 0;
  for (const std::uint8_t l : labels) (l != 0 ? n_pos : n_neg) += 1;

  double area = 0.0;
  double tp = 0.0, fp = 0.0, prev_tp = 0.0, prev_fp = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) tp += 1; else fp += 1;
    }
    area += 0.5 * (tp / n_pos + prev_tp / n_pos) * (fp - prev_fp) / n_neg;
    prev_tp = tp;
    prev_fp = fp;
    i = j;
  }
  return area;
}

double gap_acceptance_score(std::span<const Eigen::Matrix2Xd> samples, const Scene& gap_scene,
                            int horizon_steps, double lane_boundary_y) {
  if (!gap_scene.gap_meta) {
    throw ValidationError("gap_acceptance_score: scene has no gap metadata");
  }
  if (samples.empty()) throw ValidationError("gap_acceptance_score: no samples");
  if (horizon_steps < 1) throw ValidationError("gap_acceptance_score: bad horizon");

  std::size_t crossed = 0;
  for (const auto& traj : samples) {
    const int steps = std::min<int>(horizon_steps, static_cast<int>(traj.cols()));
    for (int s = 0; s < steps; ++s) {
      if (traj(1, s) >= lane_boundary_y) {
        ++crossed;
        break;
      }
    }
  }
  return static_cast<double>(crossed) / static_cast<double>(samples.size());
}

// ---- results table ----

namespace {
constexpr const char* kResultsHeader = "model,beta,split,metric,horizon_s,value,seed";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace

void MetricsTable::append(MetricRow row) {
  for (const auto& r : rows) {
    if (r.model == row.model && r.beta == row.beta && r.split == row.split &&
        r.metric == row.metric && r.horizon_s == row.horizon_s && r.seed == row.seed) {
      throw ValidationError("duplicate metrics row: " + row.model + "/" + row.metric);
    }
  }
  rows.push_back(std::move(row));
}

void MetricsTable::append(const MetricsTable& other) {
  for (const auto& r : other.rows) append(r);
}

std::string results_to_csv(const MetricsTable& table) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const auto& r : table.rows) {
    out += r.model;
    out += ',';
    out += fmt_double(r.beta);
    out += ',';
    out += r.split;
    out += ',';
    out += r.metric;
    out += ',';
    out += fmt_double(r.horizon_s);
    out += ',';
    out += fmt_double(r.value);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

MetricsTable results_from_csv(const std::string& text) {
  MetricsTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kResultsHeader) {
        throw ParseError("line 1: expected header '" + std::string(kResultsHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 7) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 7 fields");
    }
    auto to_double = [&](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
      return v;
    };
    MetricRow row;
    row.model = fields[0];
    row.beta = to_double(fields[1]);
    row.split = fields[2];
    row.metric = fields[3];
    row.horizon_s = to_double(fields[4]);
    row.value = to_double(fields[5]);
    row.seed = static_cast<std::uint64_t>(to_double(fields[6]));
    table.append(std::move(row));
  }
  return table;
}

void save_results(const MetricsTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path.string());
  out << results_to_csv(table);
}

MetricsTable load_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return results_from_csv(ss.str());
}

}  // namespace trajsmooth
