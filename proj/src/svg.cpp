#include "cmcindex/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cmcindex {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

// 1, 2 or 5 times a power of ten, giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::string spectrum_svg(const SpectralResult& res, const std::string& title,
                         int max_eigenvalues) {
  const int width = 720, height = 160;
  const double left = 40, right = width - 20, axis_y = 100;
  const int count = std::min<int>(max_eigenvalues, res.eigenvalues.size());

  double lo = 0.0, hi = 1.0;
  if (count > 0) {
    lo = std::min(0.0, res.eigenvalues.front());
    hi = std::max(1.0, res.eigenvalues[count - 1]);
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto px = [&](double v) { return left + (right - left) * (v - lo) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << escape(title) << " (i=" << res.index << ", n=" << res.nullity
      << ")</text>\n";
  svg << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(axis_y)
      << "\" x2=\"" << fixed(right) << "\" y2=\"" << fixed(axis_y)
      << "\" stroke=\"black\"/>\n";

  const double step = nice_step(hi - lo, 8);
  for (double t = std::ceil(lo / step) * step; t <= hi; t += step) {
    const double x = px(t);
    svg << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(axis_y)
        << "\" x2=\"" << fixed(x) << "\" y2=\"" << fixed(axis_y + 5)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(axis_y + 20)
        << "\" font-family=\"sans-serif\" font-size=\"10\" "
           "text-anchor=\"middle\">"
        << fixed(t, step < 1.0 ? 1 : 0) << "</text>\n";
  }

  for (int k = 0; k < count; ++k) {
    const double lam = res.eigenvalues[k];
    const char* color = lam < -res.null_tolerance  ? "#c0392b"
                        : lam <= res.null_tolerance ? "#7f8c8d"
                                                    : "#2471a3";
    const double x = px(lam);
    svg << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(axis_y - 40)
        << "\" x2=\"" << fixed(x) << "\" y2=\"" << fixed(axis_y)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
  }

  const char* labels[] = {"negative", "null", "positive"};
  const char* colors[] = {"#c0392b", "#7f8c8d", "#2471a3"};
  for (int k = 0; k < 3; ++k) {
    const double x = right - 240 + 80 * k;
    svg << "<rect x=\"" << fixed(x) << "\" y=\"36\" width=\"10\" "
           "height=\"10\" fill=\""
        << colors[k] << "\"/>\n";
    svg << "<text x=\"" << fixed(x + 14) << "\" y=\"45\" "
           "font-family=\"sans-serif\" font-size=\"10\">"
        << labels[k] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace cmcindex
