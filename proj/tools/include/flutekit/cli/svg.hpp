#pragma once

// Minimal SVG figure builder: stacked panels with linear axes, scatter
// markers, polylines and guide lines. Coordinates are printed with fixed
// precision so output is byte-stable.

#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flutekit/fit.hpp"

namespace flutekit::cli {

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  /// Bounds of the finite values; {0, 1} when there are none.
  static Range of(std::span<const double> values);
  Range padded(double fraction) const;
  Range merged(const Range& other) const;
};

class Panel {
 public:
  Panel(double left, double top, double width, double height, Range x, Range y);

  void set_labels(std::string title, std::string xlabel, std::string ylabel);
  void scatter(std::span<const Point> points, std::string_view color, double radius = 1.6);
  void polyline(std::span<const Point> points, std::string_view color, double width = 1.2);
  void vline(double x, std::string_view color, std::string_view label = {});
  void hline(double y, std::string_view color, std::string_view label = {});
  void legend(std::string_view label, std::string_view color);

  std::string render(int clip_id) const;

 private:
  double px(double x) const;
  double py(double y) const;

  double left_, top_, width_, height_;
  Range x_, y_;
  std::string title_, xlabel_, ylabel_;
  std::vector<std::string> body_;
  std::vector<std::pair<std::string, std::string>> legend_;
  int vlines_ = 0;
};

/// Panels are stacked top to bottom in the order they are added.
class Figure {
 public:
  explicit Figure(double width = 760.0, double panel_height = 300.0);

  Panel& add_panel(Range x, Range y);
  std::string render() const;

 private:
  double width_, panel_height_;
  std::deque<Panel> panels_;
};

/// Stable categorical colour for an integer key.
std::string_view palette(int key);

}  // namespace flutekit::cli
