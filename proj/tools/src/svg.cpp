#include "flutekit/cli/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace flutekit::cli {

namespace {

constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 45.0;

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Heckbert's nice numbers.
double nice(double x, bool round) {
  const double e = std::floor(std::log10(x));
  const double f = x / std::pow(10.0, e);
  double nf;
  if (round)
    nf = f < 1.5 ? 1 : f < 3 ? 2 : f < 7 ? 5 : 10;
  else
    nf = f <= 1 ? 1 : f <= 2 ? 2 : f <= 5 ? 5 : 10;
  return nf * std::pow(10.0, e);
}

std::vector<double> ticks(const Range& r, int target = 5) {
  const double span = nice(r.hi - r.lo, false);
  const double step = nice(span / (target - 1), true);
  std::vector<double> out;
  for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

std::string tick_label(double v) {
  auto s = fmt::format("{:.4g}", v);
  return s == "-0" ? "0" : s;
}

}  // namespace

Range Range::of(std::span<const double> values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo > hi) return {};
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

Range Range::padded(double fraction) const {
  const double d = (hi - lo) * fraction;
  return {lo - d, hi + d};
}

Range Range::merged(const Range& o) const { return {std::min(lo, o.lo), std::max(hi, o.hi)}; }

Panel::Panel(double left, double top, double width, double height, Range x, Range y)
    : left_(left), top_(top), width_(width), height_(height), x_(x), y_(y) {}

void Panel::set_labels(std::string title, std::string xlabel, std::string ylabel) {
  title_ = std::move(title);
  xlabel_ = std::move(xlabel);
  ylabel_ = std::move(ylabel);
}

double Panel::px(double x) const { return left_ + (x - x_.lo) / (x_.hi - x_.lo) * width_; }
double Panel::py(double y) const { return top_ + height_ - (y - y_.lo) / (y_.hi - y_.lo) * height_; }

void Panel::scatter(std::span<const Point> points, std::string_view color, double radius) {
  if (points.empty()) return;
  std::string g = fmt::format("<g fill=\"{}\">", color);
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    g += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.1f}\"/>", px(p.x), py(p.y), radius);
  }
  body_.push_back(g + "</g>");
}

void Panel::polyline(std::span<const Point> points, std::string_view color, double width) {
  if (points.size() < 2) return;
  std::string pts;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    if (!pts.empty()) pts += ' ';
    pts += fmt::format("{:.2f},{:.2f}", px(p.x), py(p.y));
  }
  body_.push_back(fmt::format(
      "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{:.1f}\" points=\"{}\"/>", color, width,
      pts));
}

void Panel::vline(double x, std::string_view color, std::string_view label) {
  const double X = px(x);
  body_.push_back(fmt::format(
      "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"{3}\" "
      "stroke-dasharray=\"4 3\"/>",
      X, top_, top_ + height_, color));
  if (!label.empty())
    body_.push_back(fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" fill=\"{}\">{}</text>", X + 3,
        top_ + 12 + 12 * (vlines_++ % 4), color, escape(label)));
}

void Panel::hline(double y, std::string_view color, std::string_view label) {
  const double Y = py(y);
  body_.push_back(fmt::format(
      "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"{3}\" "
      "stroke-dasharray=\"4 3\"/>",
      left_, Y, left_ + width_, color));
  if (!label.empty())
    body_.push_back(fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" fill=\"{}\">{}</text>", left_ + 4, Y - 3,
        color, escape(label)));
}

void Panel::legend(std::string_view label, std::string_view color) {
  legend_.emplace_back(std::string(label), std::string(color));
}

std::string Panel::render(int clip_id) const {
  std::string s;
  s += fmt::format(
      "<clipPath id=\"c{}\"><rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\"/>"
      "</clipPath>\n",
      clip_id, left_, top_, width_, height_);
  s += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
      "stroke=\"#444\"/>\n",
      left_, top_, width_, height_);

  for (double t : ticks(x_)) {
    const double X = px(t);
    s += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#444\"/>"
        "<text x=\"{0:.2f}\" y=\"{3:.2f}\" font-size=\"10\" text-anchor=\"middle\">{4}</text>\n",
        X, top_ + height_, top_ + height_ + 4, top_ + height_ + 15, tick_label(t));
  }
  for (double t : ticks(y_)) {
    const double Y = py(t);
    s += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#444\"/>"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" font-size=\"10\" text-anchor=\"end\">{5}</text>\n",
        left_ - 4, Y, left_, left_ - 6, Y + 3, tick_label(t));
  }

  if (!title_.empty())
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\">{}</text>\n", left_,
                     top_ - 8, escape(title_));
  if (!xlabel_.empty())
    s += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        left_ + width_ / 2, top_ + height_ + 32, escape(xlabel_));
  if (!ylabel_.empty()) {
    const double X = left_ - 50;
    const double Y = top_ + height_ / 2;
    s += fmt::format(
        "<text x=\"{0:.2f}\" y=\"{1:.2f}\" font-size=\"11\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 {0:.2f} {1:.2f})\">{2}</text>\n",
        X, Y, escape(ylabel_));
  }

  s += fmt::format("<g clip-path=\"url(#c{})\">\n", clip_id);
  for (const auto& b : body_) s += b + "\n";
  s += "</g>\n";

  double lx = left_ + width_;
  for (auto it = legend_.rbegin(); it != legend_.rend(); ++it) {
    const auto& [label, color] = *it;
    lx -= 18.0 + 6.0 * static_cast<double>(label.size());
    s += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"8\" height=\"8\" fill=\"{}\"/>"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">{}</text>\n",
        lx, top_ - 16, color, lx + 11, top_ - 8, escape(label));
  }
  return s;
}

Figure::Figure(double width, double panel_height) : width_(width), panel_height_(panel_height) {}

Panel& Figure::add_panel(Range x, Range y) {
  const double top = static_cast<double>(panels_.size()) * panel_height_ + kMarginTop;
  panels_.emplace_back(kMarginLeft, top, width_ - kMarginLeft - kMarginRight,
                       panel_height_ - kMarginTop - kMarginBottom, x, y);
  return panels_.back();
}

std::string Figure::render() const {
  const double height = static_cast<double>(panels_.size()) * panel_height_;
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      width_, height);
  int id = 0;
  for (const auto& p : panels_) s += p.render(id++);
  return s + "</svg>\n";
}

std::string_view palette(int key) {
  static constexpr std::array<std::string_view, 10> colors = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const auto n = static_cast<int>(colors.size());
  return colors[static_cast<std::size_t>(((key % n) + n) % n)];
}

}  // namespace flutekit::cli
