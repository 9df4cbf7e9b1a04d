#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "helf/geometry.hpp"

// Deterministic SVG emission: the unit-circle boundary, curve polylines, and
// frame-by-frame overlays with an opacity ramp.

namespace helf {

class SvgWriter {
 public:
  explicit SvgWriter(double size = 640.0) : size_(size) {}

  void add_curve(const SampledCurve& c, const std::string& color = "#1f4e8c",
                 double width = 1.6, double opacity = 1.0) {
    Poly p;
    p.closed = c.closed();
    p.color = color;
    p.width = width;
    p.opacity = opacity;
    p.pts = c.nodes;
    polys_.push_back(std::move(p));
  }

  void add_overlay(const std::vector<SampledCurve>& frames, const std::string& color = "#b03030",
                   double width = 1.0) {
    const std::size_t n = frames.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double opacity = n > 1 ? 0.15 + 0.85 * static_cast<double>(k) / (n - 1) : 1.0;
      add_curve(frames[k], color, width, opacity);
    }
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    char buf[256];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  size_, size_, size_, size_);
    out << buf;
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"none\" stroke=\"#888\" "
                  "stroke-width=\"1\"/>\n",
                  0.5 * size_, 0.5 * size_, 0.5 * size_ / 1.1);
    out << buf;
    for (const auto& p : polys_) {
      out << (p.closed ? "<polygon" : "<polyline") << " fill=\"none\" stroke=\"" << p.color
          << "\"";
      std::snprintf(buf, sizeof buf, " stroke-width=\"%.2f\" stroke-opacity=\"%.3f\" points=\"",
                    p.width, p.opacity);
      out << buf;
      for (const Vec2& q : p.pts) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f ", to_px(q.x), to_px(-q.y));
        out << buf;
      }
      out << "\"/>\n";
    }
    out << "</svg>\n";
    if (!out) throw io_error("write failed: " + path);
  }

 private:
  struct Poly {
    std::vector<Vec2> pts;
    bool closed = false;
    std::string color;
    double width = 1.0;
    double opacity = 1.0;
  };

  double to_px(double v) const { return 0.5 * size_ + v * (0.5 * size_ / 1.1); }

  double size_;
  std::vector<Poly> polys_;
};

}  // namespace helf
