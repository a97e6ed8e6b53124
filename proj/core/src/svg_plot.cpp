#include "tdefumi/svg_plot.hpp"

#include <array>
#include <cstdio>
#include <ostream>

#include "tdefumi/errors.hpp"

namespace tdefumi {
namespace {

constexpr double kWidth = 560, kHeight = 480;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

double px(double far) { return kLeft + far * (kWidth - kLeft - kRight); }
double py(double pd) { return kHeight - kBottom - pd * (kHeight - kTop - kBottom); }

}  // namespace

void write_roc_svg(std::ostream& os, const std::vector<NamedCurve>& curves, const std::string& title) {
  if (curves.empty()) throw InvalidParameter("at least one curve is required");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
     << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">"
     << escape(title) << "</text>\n";

  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(t)) << "\" y2=\""
       << num(py(1)) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<line x1=\"" << num(px(0)) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(px(1)) << "\" y2=\""
       << num(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
    if (i % 2 == 0) {
      os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(py(0) + 16) << "\" text-anchor=\"middle\" "
         << "font-family=\"sans-serif\" font-size=\"11\">" << num(t).substr(0, 3) << "</text>\n";
      os << "<text x=\"" << num(px(0) - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\" "
         << "font-family=\"sans-serif\" font-size=\"11\">" << num(t).substr(0, 3) << "</text>\n";
    }
  }
  os << "<rect x=\"" << num(px(0)) << "\" y=\"" << num(py(1)) << "\" width=\"" << num(px(1) - px(0))
     << "\" height=\"" << num(py(0) - py(1)) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num((px(0) + px(1)) / 2) << "\" y=\"" << num(kHeight - 12)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">False alarm rate</text>\n";
  os << "<text x=\"16\" y=\"" << num((py(0) + py(1)) / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"13\" transform=\"rotate(-90 16 " << num((py(0) + py(1)) / 2) << ")\">Probability of detection</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kColors[c % kColors.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curves[c].points.size(); ++i) {
      const auto& p = curves[c].points[i];
      os << (i ? " " : "") << num(px(p.far)) << ',' << num(py(p.pd));
    }
    os << "\"/>\n";
    const double ly = py(0) - 14.0 * static_cast<double>(curves.size() - c);
    os << "<line x1=\"" << num(px(0.55)) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(px(0.62)) << "\" y2=\""
       << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(px(0.64)) << "\" y=\"" << num(ly + 4) << "\" font-family=\"sans-serif\" "
       << "font-size=\"11\">" << escape(curves[c].name) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace tdefumi
