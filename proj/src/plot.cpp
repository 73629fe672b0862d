#include "stratlearn/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "stratlearn/experiment.hpp"

namespace stratlearn {

namespace fs = std::filesystem;

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "loss_curves") return PlotKind::LossCurves;
  if (s == "topview_trajectories") return PlotKind::TopView;
  if (s == "quiver") return PlotKind::Quiver;
  throw PlotError(fmt::format("unknown plot kind '{}' (loss_curves, topview_trajectories, quiver)", s));
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Table {
  std::string header;
  std::vector<std::vector<std::string>> rows;
};

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PlotError(fmt::format("cannot read '{}'", path.string()));
  Table t;
  if (!std::getline(in, t.header)) throw PlotError(fmt::format("'{}' is empty", path.string()));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto& row = t.rows.emplace_back();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
  }
  if (t.rows.empty()) throw PlotError(fmt::format("'{}' has no data rows", path.string()));
  return t;
}

double num(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw PlotError(fmt::format("malformed number '{}'", s));
  }
}

struct Series {
  std::string label;
  std::vector<double> x, y;
};

class Canvas {
 public:
  static constexpr double W = 820, H = 520, L = 80, R = 180, T = 40, B = 60;

  Canvas(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (x1_ <= x0_) x1_ = x0_ + 1;
    if (y1_ <= y0_) y1_ = y0_ + 1;
  }

  double px(double x) const { return L + (x - x0_) / (x1_ - x0_) * (W - L - R); }
  double py(double y) const { return H - B - (y - y0_) / (y1_ - y0_) * (H - T - B); }

  void axes(const std::string& xlabel, const std::string& ylabel, const std::string& title, bool log_y) {
    body_ += fmt::format(R"svg(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333"/>)svg" "\n", L, T,
                         W - L - R, H - T - B);
    for (int k = 0; k <= 5; ++k) {
      double xv = x0_ + (x1_ - x0_) * k / 5, yv = y0_ + (y1_ - y0_) * k / 5;
      body_ += fmt::format(R"svg(<text x="{:.1f}" y="{:.1f}" font-size="11" text-anchor="middle">{:.3g}</text>)svg" "\n",
                           px(xv), H - B + 16, xv);
      std::string ylab = log_y ? fmt::format("1e{:.1f}", yv) : fmt::format("{:.3g}", yv);
      body_ += fmt::format(R"svg(<text x="{:.1f}" y="{:.1f}" font-size="11" text-anchor="end">{}</text>)svg" "\n", L - 6,
                           py(yv) + 4, ylab);
    }
    body_ += fmt::format(R"svg(<text x="{:.1f}" y="{:.1f}" font-size="13" text-anchor="middle">{}</text>)svg" "\n",
                         (L + W - R) / 2, H - 15, xlabel);
    body_ += fmt::format(
        R"svg(<text x="18" y="{:.1f}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1f})">{}</text>)svg"
        "\n",
        (T + H - B) / 2, (T + H - B) / 2, ylabel);
    if (!title.empty())
      body_ += fmt::format(R"svg(<text x="{:.1f}" y="24" font-size="15" text-anchor="middle">{}</text>)svg" "\n",
                           (L + W - R) / 2, title);
  }

  void polyline(const Series& s, const char* color, const char* dash = nullptr) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
    }
    body_ += fmt::format(R"svg(<polyline fill="none" stroke="{}" stroke-width="1.5"{} points="{}"/>)svg" "\n", color,
                         dash ? fmt::format(R"svg( stroke-dasharray="{}")svg", dash) : "", pts);
  }

  void legend(std::size_t index, const std::string& label, const char* color) {
    double y = T + 14 + 18 * static_cast<double>(index);
    body_ += fmt::format(R"svg(<line x1="{}" y1="{:.1f}" x2="{}" y2="{:.1f}" stroke="{}" stroke-width="2"/>)svg" "\n",
                         W - R + 10, y, W - R + 30, y, color);
    body_ += fmt::format(R"svg(<text x="{}" y="{:.1f}" font-size="11">{}</text>)svg" "\n", W - R + 35, y + 4, label);
  }

  void circle(double x, double y, double r, const char* fill) {
    body_ += fmt::format(R"svg(<circle cx="{:.2f}" cy="{:.2f}" r="{}" fill="{}"/>)svg" "\n", px(x), py(y), r, fill);
  }

  void cross(double x, double y, double size, const char* color) {
    double cx = px(x), cy = py(y);
    body_ += fmt::format(R"svg(<path d="M{:.2f},{:.2f}L{:.2f},{:.2f}M{:.2f},{:.2f}L{:.2f},{:.2f}" stroke="{}" stroke-width="2"/>)svg"
                         "\n",
                         cx - size, cy - size, cx + size, cy + size, cx - size, cy + size, cx + size, cy - size, color);
  }

  void arrow(double x, double y, double dx, double dy, const char* color) {
    double ax = px(x), ay = py(y), bx = px(x + dx), by = py(y + dy);
    body_ += fmt::format(R"svg(<line x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="{}" stroke-width="1.2" marker-end="url(#head)"/>)svg"
                         "\n",
                         ax, ay, bx, by, color);
  }

  std::string str() const {
    return fmt::format(
        R"svg(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)svg" "\n"
        R"svg(<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto"><path d="M0,0L6,3L0,6z" fill="#444"/></marker></defs>)svg" "\n"
        R"svg(<rect width="100%" height="100%" fill="white"/>)svg" "\n{}</svg>\n",
        W, H, W, H, body_);
  }

 private:
  double x0_, x1_, y0_, y1_;
  std::string body_;
};

std::string label_for(const fs::path& p) {
  return p.has_parent_path() && !p.parent_path().filename().empty()
             ? p.parent_path().filename().string() + "/" + p.stem().string()
             : p.stem().string();
}

std::string loss_curves(const std::vector<fs::path>& csvs, const PlotOptions& opts) {
  std::vector<Series> series;
  for (const auto& f : csvs) {
    Table t = read_csv(f);
    if (t.header == kTrajectoryHeader) {
      Series s{label_for(f), {}, {}};
      for (const auto& r : t.rows) {
        if (r.size() != 8) throw PlotError(fmt::format("'{}': row has {} fields, expected 8", f.string(), r.size()));
        s.x.push_back(num(r[0]));
        s.y.push_back(std::log10(std::max(num(r[6]), 1e-16)));
      }
      series.push_back(std::move(s));
    } else if (t.header == kAggregateHeader) {
      Series mean{label_for(f) + " mean", {}, {}}, med{label_for(f) + " median", {}, {}};
      for (const auto& r : t.rows) {
        if (r.size() != 4) throw PlotError(fmt::format("'{}': row has {} fields, expected 4", f.string(), r.size()));
        mean.x.push_back(num(r[0]));
        med.x.push_back(num(r[0]));
        mean.y.push_back(std::log10(std::max(num(r[1]), 1e-16)));
        med.y.push_back(std::log10(std::max(num(r[2]), 1e-16)));
      }
      series.push_back(std::move(mean));
      series.push_back(std::move(med));
    } else {
      throw PlotError(fmt::format("'{}': header '{}' is neither a trajectory nor an aggregate CSV", f.string(), t.header));
    }
  }
  double x0 = 0, x1 = 1, y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const auto& s : series) {
    for (double v : s.x) x1 = std::max(x1, v);
    for (double v : s.y) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  Canvas c(x0, x1, std::floor(y0), std::ceil(y1));
  c.axes("step", "loss (log10)", opts.title, true);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 10];
    c.polyline(series[i], color);
    c.legend(i, series[i].label, color);
  }
  return c.str();
}

std::string topview(const std::vector<fs::path>& csvs, const PlotOptions& opts) {
  std::vector<Series> series;
  for (const auto& f : csvs) {
    Table t = read_csv(f);
    if (t.header != kTrajectoryHeader) throw PlotError(fmt::format("'{}' is not a trajectory CSV", f.string()));
    Series s{label_for(f), {}, {}};
    for (const auto& r : t.rows) {
      if (r.size() != 8) throw PlotError(fmt::format("'{}': row has {} fields, expected 8", f.string(), r.size()));
      s.x.push_back(num(r[4]));
      s.y.push_back(num(r[5]));
    }
    series.push_back(std::move(s));
  }
  double lim = 0.1;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) lim = std::max({lim, std::abs(s.x[i]), std::abs(s.y[i])});
  if (opts.target) lim = std::max({lim, std::abs((*opts.target)[0]), std::abs((*opts.target)[1])});
  lim *= 1.1;
  Canvas c(-lim, lim, -lim, lim);
  c.axes("mu2", "mu3", opts.title, false);
  c.cross(0, 0, 4, "#000");  // apex
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 10];
    c.polyline(series[i], color);
    c.circle(series[i].x.front(), series[i].y.front(), 4, color);
    c.legend(i, series[i].label, color);
  }
  if (opts.target) c.cross((*opts.target)[0], (*opts.target)[1], 6, "#2ca02c");
  return c.str();
}

std::string quiver(const std::vector<fs::path>& csvs, const PlotOptions& opts) {
  struct Row {
    double level, x, y, gx, gy;
    bool defined;
  };
  std::vector<Row> rows;
  for (const auto& f : csvs) {
    Table t = read_csv(f);
    if (t.header != kQuiverHeader) throw PlotError(fmt::format("'{}' is not a quiver CSV", f.string()));
    for (const auto& r : t.rows) {
      if (r.size() != 6) throw PlotError(fmt::format("'{}': row has {} fields, expected 6", f.string(), r.size()));
      bool defined = r[5] == "ok";
      if (!defined && r[5] != "UNDEFINED") throw PlotError(fmt::format("unknown status '{}'", r[5]));
      rows.push_back({num(r[0]), num(r[1]), num(r[2]), num(r[3]), num(r[4]), defined});
    }
  }
  double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0, gmax = 0;
  for (const auto& r : rows) {
    lo_x = std::min(lo_x, r.x);
    hi_x = std::max(hi_x, r.x);
    lo_y = std::min(lo_y, r.y);
    hi_y = std::max(hi_y, r.y);
    if (r.defined) gmax = std::max(gmax, std::hypot(r.gx, r.gy));
  }
  double pad = 0.15 * std::max(hi_x - lo_x, hi_y - lo_y);
  Canvas c(lo_x - pad, hi_x + pad, lo_y - pad, hi_y + pad);
  c.axes("x0", "x1", opts.title, false);
  double scale = gmax > 0 ? 0.12 * std::max(hi_x - lo_x, hi_y - lo_y) / gmax : 1.0;
  std::vector<double> levels;
  for (const auto& r : rows)
    if (std::find(levels.begin(), levels.end(), r.level) == levels.end()) levels.push_back(r.level);
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const char* color = kPalette[li % 10];
    c.legend(li, fmt::format("level {:.3g}", levels[li]), color);
    for (const auto& r : rows) {
      if (r.level != levels[li]) continue;
      c.circle(r.x, r.y, 2, color);
      if (r.defined) {
        c.arrow(r.x, r.y, -scale * r.gx, -scale * r.gy, color);
      } else {
        c.cross(r.x, r.y, 6, "#d62728");
      }
    }
  }
  return c.str();
}

}  // namespace

void plot(PlotKind kind, const std::vector<fs::path>& csvs, const fs::path& out, const PlotOptions& opts) {
  if (csvs.empty()) throw PlotError("no input CSV files");
  std::string svg;
  switch (kind) {
    case PlotKind::LossCurves: svg = loss_curves(csvs, opts); break;
    case PlotKind::TopView: svg = topview(csvs, opts); break;
    case PlotKind::Quiver: svg = quiver(csvs, opts); break;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw PlotError(fmt::format("cannot write '{}'", out.string()));
  f << svg;
}

}  // namespace stratlearn
