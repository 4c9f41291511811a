#ifndef QCONC_PLOTS_HPP
#define QCONC_PLOTS_HPP

// Deterministic SVG renderings of a completed run, built only from the CSV
// artifacts listed in its run record.

#include <qconc/experiment.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace qconc {

/// Parsed CSV body: header names and rows of raw cells. Version comment lines
/// starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::runtime_error("csv: missing column '" + name + "'");
  }

  std::vector<double> numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.at(c).empty() ? std::nan("") : std::stod(r.at(c)));
    return out;
  }
};

inline CsvTable read_csv(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing CSV '" + p.string() + "'");
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw std::runtime_error("empty CSV '" + p.string() + "'");
  return t;
}

namespace svg {

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 420.0;
inline constexpr double kLeft = 70.0;
inline constexpr double kRight = 150.0;
inline constexpr double kTop = 40.0;
inline constexpr double kBottom = 50.0;

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return colors[i % 6];
}

inline std::string f(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // points instead of a polyline
  bool dashed = false;
};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

inline Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double d = std::max(std::abs(lo) * 0.05, 1e-12);
    return {lo - d, hi + d};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

class Canvas {
 public:
  Canvas(const std::string& title, Range xr, Range yr, const std::string& xlabel, const std::string& ylabel)
      : xr_(xr), yr_(yr) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(kWidth) << "\" height=\"" << f(kHeight)
         << "\" viewBox=\"0 0 " << f(kWidth) << ' ' << f(kHeight) << "\">\n";
    out_ << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << f(kWidth) << "\" height=\"" << f(kHeight)
         << "\" fill=\"white\"/>\n";
    out_ << "<text class=\"title\" x=\"" << f(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" "
         << "font-family=\"sans-serif\" font-size=\"14\">" << escape(title) << "</text>\n";
    out_ << "<text class=\"xlabel\" x=\"" << f(kLeft + plot_w() / 2) << "\" y=\"" << f(kHeight - 10)
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
    out_ << "<text class=\"ylabel\" x=\"16\" y=\"" << f(kTop + plot_h() / 2) << "\" text-anchor=\"middle\" "
         << "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " << f(kTop + plot_h() / 2)
         << ")\">" << escape(ylabel) << "</text>\n";
  }

  double px(double x) const { return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * plot_w(); }
  double py(double y) const { return kTop + plot_h() - (y - yr_.lo) / (yr_.hi - yr_.lo) * plot_h(); }
  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  std::ostringstream& raw() { return out_; }

  void axes() {
    out_ << "<rect class=\"frame\" x=\"" << f(kLeft) << "\" y=\"" << f(kTop) << "\" width=\"" << f(plot_w())
         << "\" height=\"" << f(plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = xr_.lo + (xr_.hi - xr_.lo) * i / 4.0;
      const double yv = yr_.lo + (yr_.hi - yr_.lo) * i / 4.0;
      out_ << "<text class=\"tick\" x=\"" << f(px(xv)) << "\" y=\"" << f(kTop + plot_h() + 16)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << tick(xv) << "</text>\n";
      out_ << "<text class=\"tick\" x=\"" << f(kLeft - 6) << "\" y=\"" << f(py(yv) + 3)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << tick(yv) << "</text>\n";
    }
  }

  void series(const std::vector<Series>& all) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto& s = all[i];
      if (s.markers) {
        out_ << "<g class=\"series\" fill=\"" << palette(i) << "\">\n";
        for (std::size_t k = 0; k < s.x.size(); ++k) {
          if (!std::isfinite(s.y[k])) continue;
          out_ << "<circle cx=\"" << f(px(s.x[k])) << "\" cy=\"" << f(py(s.y[k])) << "\" r=\"2.5\"/>\n";
        }
        out_ << "</g>\n";
      } else {
        out_ << "<polyline class=\"series\" fill=\"none\" stroke=\"" << palette(i) << "\" stroke-width=\"1.5\""
             << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        bool first = true;
        for (std::size_t k = 0; k < s.x.size(); ++k) {
          if (!std::isfinite(s.y[k])) continue;
          out_ << (first ? "" : " ") << f(px(s.x[k])) << ',' << f(py(s.y[k]));
          first = false;
        }
        out_ << "\"/>\n";
      }
    }
    legend(all);
  }

  template <typename S>
  void legend(const std::vector<S>& all) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      const double y = kTop + 14.0 + 18.0 * static_cast<double>(i);
      out_ << "<rect class=\"legend\" x=\"" << f(kWidth - kRight + 12) << "\" y=\"" << f(y - 8)
           << "\" width=\"12\" height=\"4\" fill=\"" << palette(i) << "\"/>\n";
      out_ << "<text class=\"legend\" x=\"" << f(kWidth - kRight + 30) << "\" y=\"" << f(y - 2)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(all[i].label) << "</text>\n";
    }
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  Range xr_;
  Range yr_;
  std::ostringstream out_;
};

inline std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& all) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : all) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      xlo = std::min(xlo, s.x[k]);
      xhi = std::max(xhi, s.x[k]);
      ylo = std::min(ylo, s.y[k]);
      yhi = std::max(yhi, s.y[k]);
    }
  }
  if (!std::isfinite(xlo)) throw std::runtime_error("plot '" + title + "': no finite data");
  Canvas c(title, padded(xlo, xhi), padded(ylo, yhi), xlabel, ylabel);
  c.axes();
  c.series(all);
  return c.finish();
}

/// Filled-cell heat map of the loss on the PCA plane with trajectory
/// polylines on top.
inline std::string pca_chart(const std::string& title, const CsvTable& grid, const CsvTable& paths) {
  const auto gx = grid.numbers("x");
  const auto gy = grid.numbers("y");
  const auto gl = grid.numbers("loss");
  if (gx.empty()) throw std::runtime_error("plot '" + title + "': empty grid");
  std::vector<double> xs(gx);
  std::vector<double> ys(gy);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  const Range xr{xs.front(), xs.back()};
  const Range yr{ys.front(), ys.back()};
  Canvas c(title, xr, yr, "PC1", "PC2");
  const double lmin = *std::min_element(gl.begin(), gl.end());
  const double lmax = *std::max_element(gl.begin(), gl.end());
  const double cw = Canvas::plot_w() / static_cast<double>(std::max<std::size_t>(xs.size() - 1, 1));
  const double ch = Canvas::plot_h() / static_cast<double>(std::max<std::size_t>(ys.size() - 1, 1));
  c.raw() << "<g class=\"grid\">\n";
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double t = lmax > lmin ? (gl[i] - lmin) / (lmax - lmin) : 0.5;
    const int r = static_cast<int>(std::lround(68 + t * (253 - 68)));
    const int g = static_cast<int>(std::lround(1 + t * (231 - 1)));
    const int b = static_cast<int>(std::lround(84 + t * (37 - 84)));
    char color[16];
    std::snprintf(color, sizeof color, "#%02x%02x%02x", r, g, b);
    c.raw() << "<rect x=\"" << f(c.px(gx[i]) - cw / 2) << "\" y=\"" << f(c.py(gy[i]) - ch / 2) << "\" width=\""
            << f(cw) << "\" height=\"" << f(ch) << "\" fill=\"" << color << "\"/>\n";
  }
  c.raw() << "</g>\n";
  c.axes();

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> by_regime;
  const auto rc = paths.column("regime");
  const auto xc = paths.column("x");
  const auto yc = paths.column("y");
  for (const auto& row : paths.rows) {
    const auto& name = row.at(rc);
    if (!by_regime.count(name)) order.push_back(name);
    by_regime[name].emplace_back(std::stod(row.at(xc)), std::stod(row.at(yc)));
  }
  struct Label {
    std::string label;
  };
  std::vector<Label> labels;
  for (std::size_t i = 0; i < order.size(); ++i) {
    c.raw() << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"" << palette(i)
            << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : by_regime[order[i]]) {
      c.raw() << (first ? "" : " ") << f(c.px(x)) << ',' << f(c.py(y));
      first = false;
    }
    c.raw() << "\"/>\n";
    labels.push_back({"shots " + order[i]});
  }
  c.legend(labels);
  return c.finish();
}

}  // namespace svg

/// Renders plots for the run stored in output_dir and records them in its
/// run_record.json. Returns the relative paths written. Throws (without
/// writing anything) when an input CSV is missing or a training run has no
/// trajectories.
inline std::vector<std::string> emit_plots(const std::filesystem::path& output_dir) {
  const auto record_path = output_dir / "run_record.json";
  std::ifstream in(record_path, std::ios::binary);
  if (!in) throw std::runtime_error("missing run record '" + record_path.string() + "'");
  auto record = nlohmann::ordered_json::parse(in);
  in.close();
  const auto config = detail::parse_config_json(nlohmann::json::parse(record.at("config").dump()), "");

  std::vector<std::pair<std::string, std::string>> plots;  // (relative path, svg)
  switch (config.kind) {
    case ExperimentKind::training: {
      const auto& t = config.training;
      if (t.ensemble == 0 || t.system_sizes.empty() || t.shots.empty()) {
        throw std::runtime_error("emit_plots: empty ensemble");
      }
      for (std::size_t n : t.system_sizes) {
        std::vector<svg::Series> loss;
        for (const auto& s : t.shots) {
          const auto dir = output_dir / detail::cell_directory(t.method, n, s);
          if (!std::filesystem::exists(dir / "traj_0000.csv")) {
            throw std::runtime_error("emit_plots: empty ensemble in '" + dir.string() + "'");
          }
          const auto curve = read_csv(dir / "loss_curve.csv");
          loss.push_back({"shots " + s.label(), curve.numbers("step"), curve.numbers("median_loss_estimate")});
          if (t.diagnostics.random_walk && std::filesystem::exists(dir / "random_walk.csv")) {
            const auto rw = read_csv(dir / "random_walk.csv");
            auto steps = rw.numbers("step");
            std::vector<svg::Series> var{
                {"observed", steps, rw.numbers("update_variance"), true, false},
                {"coin model", steps, rw.numbers("predicted_variance"), false, true}};
            plots.emplace_back("plots/variance_" + std::string(to_string(t.method)) + "_n" + std::to_string(n) +
                                   "_shots_" + s.label() + ".svg",
                               svg::line_chart("Update variance per step, n=" + std::to_string(n) +
                                                   ", shots " + s.label(),
                                               "step", "variance of update component", var));
          }
        }
        plots.emplace_back("plots/loss_" + std::string(to_string(t.method)) + "_n" + std::to_string(n) + ".svg",
                           svg::line_chart(std::string(to_string(t.method)) + " median loss estimate, n=" +
                                               std::to_string(n),
                                           "step", "loss estimate (raw)", loss));
        if (t.diagnostics.pca) {
          const auto grid = read_csv(output_dir / ("pca/grid_n" + std::to_string(n) + ".csv"));
          const auto paths = read_csv(output_dir / ("pca/paths_n" + std::to_string(n) + ".csv"));
          plots.emplace_back("plots/pca_n" + std::to_string(n) + ".svg",
                             svg::pca_chart("Loss on the PCA plane, n=" + std::to_string(n), grid, paths));
        }
      }
      break;
    }
    case ExperimentKind::hypotest: {
      const auto parity = read_csv(output_dir / "parity_test.csv");
      auto shots = parity.numbers("shots");
      auto log2v = [](std::vector<double> v) {
        for (double& x : v) x = x > 0.0 ? std::log2(x) : std::nan("");
        return v;
      };
      std::vector<svg::Series> s{
          {"exact 2^-(N+1)", shots, log2v(parity.numbers("analytic_error")), false, false},
          {"Monte Carlo", shots, log2v(parity.numbers("empirical_error")), true, false}};
      plots.emplace_back("plots/parity_test.svg",
                         svg::line_chart("Parity test error", "samples N", "log2 error probability", s));
      break;
    }
    case ExperimentKind::concentration: {
      const auto table = read_csv(output_dir / "concentration.csv");
      const auto pc = table.column("povm");
      const auto n = table.numbers("num_qubits");
      const auto beta = table.numbers("beta_hat");
      std::vector<svg::Series> s;
      std::map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& name = table.rows[i].at(pc);
        if (!index.count(name)) {
          index[name] = s.size();
          s.push_back({name, {}, {}, false, false});
        }
        auto& ser = s[index[name]];
        ser.x.push_back(n[i]);
        ser.y.push_back(beta[i] > 0.0 ? std::log2(beta[i]) : std::nan(""));
      }
      plots.emplace_back("plots/concentration.svg",
                         svg::line_chart("Largest outcome-probability variance", "qubits n", "log2 beta_hat", s));
      break;
    }
  }

  std::vector<std::string> written;
  for (const auto& [rel, text] : plots) {
    detail::write_text(output_dir / rel, text);
    written.push_back(rel);
  }
  record["plots"] = written;
  detail::write_text(record_path, record.dump(2) + "\n");
  return written;
}

}  // namespace qconc

#endif  // QCONC_PLOTS_HPP
