#include "stlmpc/cli/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace stlmpc {

namespace {

constexpr double kWidth = 800.0, kHeight = 500.0, kMargin = 60.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd",
                          "#8c564b", "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  static Range of(const std::vector<double>& vs) {
    Range r{vs.front(), vs.front()};
    for (double v : vs) r.include(v);
    return r;
  }
  void pad() {
    if (hi - lo < 1e-9) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      const double p = 0.05 * (hi - lo);
      lo -= p;
      hi += p;
    }
  }
};

struct Canvas {
  Range x, y;
  std::ostringstream os;

  Canvas(Range rx, Range ry, const std::string& title) : x(rx), y(ry) {
    x.pad();
    y.pad();
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
       << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
       << kHeight << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" fill=\"#ffffff\"/>\n";
    os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
       << kWidth - 2 * kMargin << "\" height=\"" << kHeight - 2 * kMargin
       << "\" fill=\"none\" stroke=\"#000000\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kMargin / 2
       << "\" text-anchor=\"middle\" font-size=\"16\">" << title
       << "</text>\n";
  }

  double px(double v) const {
    return kMargin + (v - x.lo) / (x.hi - x.lo) * (kWidth - 2 * kMargin);
  }
  double py(double v) const {
    return kHeight - kMargin -
           (v - y.lo) / (y.hi - y.lo) * (kHeight - 2 * kMargin);
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& color, bool dashed = false) {
    if (xs.size() < 2) return;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      os << (i ? " " : "") << num(px(xs[i])) << "," << num(py(ys[i]));
    os << "\"/>\n";
  }

  void marker(double vx, double vy, const std::string& color, double r,
              const std::string& cls) {
    os << "<circle class=\"" << cls << "\" cx=\"" << num(px(vx)) << "\" cy=\""
       << num(py(vy)) << "\" r=\"" << r << "\" fill=\"" << color << "\"/>\n";
  }

  void label(std::size_t index, const std::string& text,
             const std::string& color) {
    os << "<text x=\"" << kMargin + 8 << "\" y=\""
       << kMargin + 20.0 + 18.0 * static_cast<double>(index)
       << "\" font-size=\"12\" fill=\"" << color << "\">" << text
       << "</text>\n";
  }

  std::string finish() {
    // axis extent labels
    os << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin / 3
       << "\" font-size=\"12\">" << num(x.lo) << "</text>\n";
    os << "<text x=\"" << kWidth - kMargin << "\" y=\""
       << kHeight - kMargin / 3 << "\" text-anchor=\"end\" font-size=\"12\">"
       << num(x.hi) << "</text>\n";
    os << "<text x=\"" << kMargin / 3 << "\" y=\"" << kHeight - kMargin
       << "\" font-size=\"12\">" << num(y.lo) << "</text>\n";
    os << "<text x=\"" << kMargin / 3 << "\" y=\"" << kMargin + 12
       << "\" font-size=\"12\">" << num(y.hi) << "</text>\n";
    os << "</svg>\n";
    return os.str();
  }
};

std::string render_trajectory(const LogStreams& ls) {
  if (ls.states.empty())
    throw std::invalid_argument("render_svg: empty states stream");
  std::vector<double> xs, ys;
  for (const auto& row : ls.states) {
    xs.push_back(row[1]);
    ys.push_back(row[2]);
  }
  Canvas c(Range::of(xs), Range::of(ys), "trajectory");
  c.polyline(xs, ys, kPalette[0]);
  for (std::size_t i = 0; i < xs.size(); ++i)
    c.marker(xs[i], ys[i], i == 0 ? "#2ca02c" : kPalette[0], i == 0 ? 5 : 3,
             i == 0 ? "start" : "state");
  return c.finish();
}

std::string render_controls(const LogStreams& ls) {
  if (ls.controls.empty())
    throw std::invalid_argument("render_svg: empty controls stream");
  std::vector<double> t, a, b;
  for (const auto& row : ls.controls) {
    t.push_back(row[0]);
    a.push_back(row[1]);
    b.push_back(row[2]);
  }
  Range ry = Range::of(a);
  for (double v : b) ry.include(v);
  Canvas c(Range::of(t), ry, "controls");
  c.polyline(t, a, kPalette[0]);
  c.polyline(t, b, kPalette[1]);
  for (std::size_t i = 0; i < t.size(); ++i) {
    c.marker(t[i], a[i], kPalette[0], 3, "a");
    c.marker(t[i], b[i], kPalette[1], 3, "beta");
  }
  c.label(0, "a", kPalette[0]);
  c.label(1, "beta", kPalette[1]);
  return c.finish();
}

std::string render_deltas(const LogStreams& ls) {
  if (ls.deltas.empty())
    throw std::invalid_argument("render_svg: empty deltas stream");
  std::vector<double> t, dmin;
  for (const auto& r : ls.deltas) {
    t.push_back(r.cycle);
    dmin.push_back(r.delta_min);
  }
  std::vector<std::string> specs;
  for (const auto& [name, v] : ls.deltas.front().per_spec) {
    (void)v;
    specs.push_back(name);
  }
  Range ry = Range::of(dmin);
  for (const auto& r : ls.deltas)
    for (const auto& [name, v] : r.per_spec) {
      (void)name;
      ry.include(v);
    }
  Canvas c(Range::of(t), ry, "relaxation allocation");
  for (std::size_t s = 0; s < specs.size(); ++s) {
    std::vector<double> ys;
    for (const auto& r : ls.deltas) ys.push_back(r.per_spec.at(specs[s]));
    const std::string color = kPalette[s % 6];
    c.polyline(t, ys, color);
    for (std::size_t i = 0; i < t.size(); ++i)
      c.marker(t[i], ys[i], color, 3, "delta");
    c.label(s, specs[s], color);
  }
  c.polyline(t, dmin, "#000000", /*dashed=*/true);
  c.label(specs.size(), "delta_min", "#000000");
  return c.finish();
}

std::string render_front(const LogStreams& ls) {
  if (ls.fronts.empty())
    throw std::invalid_argument("render_svg: empty fronts stream");
  // last cycle that produced a front
  const int cycle = ls.fronts.back().cycle;
  std::vector<FrontRow> rows;
  for (const auto& r : ls.fronts)
    if (r.cycle == cycle) rows.push_back(r);
  if (rows.front().g.size() < 2)
    throw std::invalid_argument("render_svg: front needs >= 2 objectives");
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r.g[0]);
    ys.push_back(r.g[1]);
  }
  std::string title = "front (cycle " + std::to_string(cycle) + ")";
  Canvas c(Range::of(xs), Range::of(ys), title);
  for (std::size_t i = 0; i < rows.size(); ++i)
    c.marker(xs[i], ys[i], rows[i].selected ? "#d62728" : kPalette[0],
             rows[i].selected ? 6 : 4, rows[i].selected ? "selected" : "candidate");
  if (ls.objective_names.size() >= 2) {
    c.label(0, "x: g_" + ls.objective_names[0], "#000000");
    c.label(1, "y: g_" + ls.objective_names[1], "#000000");
  }
  return c.finish();
}

}  // namespace

PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "trajectory") return PlotKind::Trajectory;
  if (s == "controls") return PlotKind::Controls;
  if (s == "deltas") return PlotKind::Deltas;
  if (s == "front") return PlotKind::Front;
  throw std::invalid_argument("unknown plot kind: " + s);
}

std::string render_svg(const LogStreams& ls, PlotKind kind) {
  switch (kind) {
    case PlotKind::Trajectory:
      return render_trajectory(ls);
    case PlotKind::Controls:
      return render_controls(ls);
    case PlotKind::Deltas:
      return render_deltas(ls);
    case PlotKind::Front:
      return render_front(ls);
  }
  throw std::logic_error("render_svg: unreachable");
}

}  // namespace stlmpc
