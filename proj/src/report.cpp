#include "trajsmooth/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

namespace {

std::string fmt3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fmt_beta(double beta) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", beta);
  return buf;
}

std::string fmt_h(double h) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", h);
  return buf;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (const char c : s) {
    out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b"};

// (beta, horizon) -> mean value over seeds
using Grid = std::map<std::pair<double, double>, std::pair<double, long>>;

std::string render_table(const Grid& grid, const std::vector<double>& betas,
                         const std::vector<double>& horizons) {
  // column minima for the bolding rule
  std::map<double, double> col_min;
  for (const double h : horizons) {
    double best = std::numeric_limits<double>::infinity();
    for (const double b : betas) {
      const auto it = grid.find({b, h});
      if (it != grid.end()) best = std::min(best, it->second.first / it->second.second);
    }
    col_min[h] = best;
  }

  std::string out = "| model |";
  for (const double h : horizons) out += " @" + fmt_h(h) + "s |";
  out += "\n|---|";
  for (std::size_t i = 0; i < horizons.size(); ++i) out += "---|";
  out += "\n";
  for (const double b : betas) {
    out += b == 0.0 ? "| base (beta=0) |" : "| beta=" + fmt_beta(b) + " |";
    for (const double h : horizons) {
      const auto it = grid.find({b, h});
      if (it == grid.end()) {
        out += " - |";
        continue;
      }
      const double v = it->second.first / it->second.second;
      const std::string cell = fmt3(v);
      // bold every cell that renders equal to the column minimum
      out += cell == fmt3(col_min[h]) ? " **" + cell + "** |" : " " + cell + " |";
    }
    out += "\n";
  }
  return out;
}

std::string render_svg(const std::string& title, const Grid& grid,
                       const std::vector<double>& betas, const std::vector<double>& horizons) {
  constexpr int W = 640, H = 400, ML = 70, MR = 20, MT = 40, MB = 50;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [key, v] : grid) {
    const double val = v.first / v.second;
    lo = std::min(lo, val);
    hi = std::max(hi, val);
  }
  if (!(hi > lo)) {
    hi = lo + 1.0;
    lo -= 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const auto xpos = [&](std::size_t i) {
    return ML + (W - ML - MR) * (betas.size() == 1
                                     ? 0.5
                                     : static_cast<double>(i) / (betas.size() - 1));
  };
  const auto ypos = [&](double v) { return MT + (H - MT - MB) * (1.0 - (v - lo) / (hi - lo)); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) +
                    "\" height=\"" + std::to_string(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(W / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";
  // axes
  svg += "<line x1=\"" + std::to_string(ML) + "\" y1=\"" + std::to_string(H - MB) +
         "\" x2=\"" + std::to_string(W - MR) + "\" y2=\"" + std::to_string(H - MB) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + std::to_string(ML) + "\" y1=\"" + std::to_string(MT) + "\" x2=\"" +
         std::to_string(ML) + "\" y2=\"" + std::to_string(H - MB) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < betas.size(); ++i) {
    svg += "<text x=\"" + fmt3(xpos(i)) + "\" y=\"" + std::to_string(H - MB + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           fmt_beta(betas[i]) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    svg += "<text x=\"" + std::to_string(ML - 8) + "\" y=\"" + fmt3(ypos(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + fmt3(v) +
           "</text>\n";
  }
  svg += "<text x=\"" + std::to_string(W / 2) + "\" y=\"" + std::to_string(H - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">beta</text>\n";

  for (std::size_t hidx = 0; hidx < horizons.size(); ++hidx) {
    std::string points;
    for (std::size_t i = 0; i < betas.size(); ++i) {
      const auto it = grid.find({betas[i], horizons[hidx]});
      if (it == grid.end()) continue;
      points += fmt3(xpos(i)) + "," + fmt3(ypos(it->second.first / it->second.second)) + " ";
    }
    const char* color = kPalette[hidx % 6];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" "
           "points=\"" + points + "\"/>\n";
    svg += "<text x=\"" + std::to_string(W - MR - 4) + "\" y=\"" +
           std::to_string(MT + 16 * (static_cast<int>(hidx) + 1)) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" +
           color + "\">@" + fmt_h(horizons[hidx]) + "s</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

void write_report(const MetricsTable& merged, const std::filesystem::path& out_dir) {
  if (merged.rows.empty()) throw ValidationError("report: no results to report");
  std::filesystem::create_directories(out_dir);

  // group rows by (model, split, metric)
  std::map<std::pair<std::string, std::string>, std::map<std::string, Grid>> groups;
  std::set<double> beta_set, horizon_set;
  for (const auto& r : merged.rows) {
    auto& grid = groups[{r.model, r.split}][r.metric];
    auto& cell = grid[{r.beta, r.horizon_s}];
    cell.first += r.value;
    cell.second += 1;
    beta_set.insert(r.beta);
    horizon_set.insert(r.horizon_s);
  }
  const std::vector<double> betas(beta_set.begin(), beta_set.end());
  const std::vector<double> horizons(horizon_set.begin(), horizon_set.end());

  std::string md = "# Results\n\n";
  md += "Values are seed-averaged; the lowest value per horizon column is bold.\n";
  for (const auto& [key, metrics] : groups) {
    md += "\n## " + key.first + " (" + key.second + " split)\n";
    for (const char* metric : {"fde", "ade", "kde_nll", "auc"}) {
      const auto it = metrics.find(metric);
      if (it == metrics.end()) continue;
      md += "\n### " + std::string(metric) + "\n\n";
      md += render_table(it->second, betas, horizons);

      const std::string name =
          sanitize(key.first) + "_" + sanitize(key.second) + "_" + metric + ".svg";
      std::ofstream svg(out_dir / name, std::ios::binary);
      if (!svg) throw ValidationError("cannot write file: " + (out_dir / name).string());
      svg << render_svg(std::string(metric) + " vs beta (" + key.first + ", " + key.second +
                            ")",
                        it->second, betas, horizons);
      md += "\n![" + std::string(metric) + "](" + name + ")\n";
    }
  }

  std::ofstream out(out_dir / "report.md", std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + (out_dir / "report.md").string());
  out << md;
}

}  // namespace trajsmooth
