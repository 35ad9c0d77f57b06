#include "sdrkit/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "sdrkit/error.hpp"

namespace sdrkit {

namespace {

std::string fx(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
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

// Diverging blue-white-red, saturating at |v| = 1.5.
std::string diverging(double v) {
  const double t = std::clamp(v / 1.5, -1.0, 1.0);
  int r = 255, g = 255, b = 255;
  if (t > 0) {
    g = b = static_cast<int>(std::lround(255 * (1.0 - t)));
  } else {
    r = g = static_cast<int>(std::lround(255 * (1.0 + t)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string svg_open(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
}

}  // namespace

std::string heatmap_svg(const SdrReport& r) {
  if (r.entries.empty()) throw Error("empty_report", "nothing to plot");
  const int cw = 70, ch = 28, left = 180, top = 40;
  const int w = left + cw * static_cast<int>(kTraitCount) + 20;
  const int h = top + ch * static_cast<int>(r.entries.size()) + 20;
  std::ostringstream s;
  s << svg_open(w, h);
  s << "<defs><pattern id=\"na\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
       "<rect width=\"6\" height=\"6\" fill=\"#dddddd\"/><path d=\"M0,6 L6,0\" stroke=\"#999999\"/></pattern></defs>\n";
  for (auto t : kAllTraits) {
    const int x = left + cw * static_cast<int>(index_of(t)) + cw / 2;
    s << "<text x=\"" << x << "\" y=\"" << top - 10 << "\" text-anchor=\"middle\">" << trait_letter(t) << "</text>\n";
  }
  for (std::size_t row = 0; row < r.entries.size(); ++row) {
    const auto& e = r.entries[row];
    const int y = top + ch * static_cast<int>(row);
    s << "<text x=\"" << left - 8 << "\" y=\"" << y + ch / 2 + 4 << "\" text-anchor=\"end\">"
      << xml_escape(e.model + " / " + e.format) << "</text>\n";
    for (auto t : kAllTraits) {
      const auto& v = e.effect.traits[index_of(t)].d_tilde;
      const int x = left + cw * static_cast<int>(index_of(t));
      s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\""
        << (v.value ? diverging(*v.value) : std::string("url(#na)")) << "\" stroke=\"#ffffff\"/>\n";
      s << "<text x=\"" << x + cw / 2 << "\" y=\"" << y + ch / 2 + 4 << "\" text-anchor=\"middle\">"
        << (v.value ? fx(*v.value) : std::string("NA")) << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

std::string tradeoff_svg(const SdrReport& r) {
  struct Pt {
    std::string model, format;
    double x, y;
  };
  std::vector<Pt> pts;
  for (const auto& e : r.entries)
    if (e.effect.aggregate.value && e.recovery.mean_r.value)
      pts.push_back({e.model, e.format, *e.effect.aggregate.value, *e.recovery.mean_r.value});
  if (pts.empty()) throw Error("empty_report", "no entry has both aggregate d_tilde and mean r");

  double x0 = -0.2, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x - 0.1);
    x1 = std::max(x1, p.x + 0.1);
    y0 = std::min(y0, p.y - 0.05);
  }
  const int w = 640, h = 480, ml = 60, mr = 20, mt = 20, mb = 50;
  auto X = [&](double v) { return ml + (v - x0) / (x1 - x0) * (w - ml - mr); };
  auto Y = [&](double v) { return mt + (y1 - v) / (y1 - y0) * (h - mt - mb); };
  std::ostringstream s;
  s << svg_open(w, h);

  // SDR bands by |aggregate d_tilde|.
  auto band = [&](double a, double b, const char* fill, const char* zone) {
    a = std::max(a, x0);
    b = std::min(b, x1);
    if (b <= a) return;
    s << "<rect class=\"zone-" << zone << "\" x=\"" << fx(X(a)) << "\" y=\"" << fx(Y(y1)) << "\" width=\""
      << fx(X(b) - X(a)) << "\" height=\"" << fx(Y(y0) - Y(y1)) << "\" fill=\"" << fill << "\"/>\n";
  };
  band(-0.2, 0.2, "#e3f2e1", "recommended");
  band(0.2, 0.5, "#fcf3d9", "caution");
  band(-0.5, -0.2, "#fcf3d9", "caution");
  band(0.5, x1, "#f8dede", "avoid");
  band(x0, -0.5, "#f8dede", "avoid");
  for (double rl : {0.5, 0.7}) {
    if (rl < y0 || rl > y1) continue;
    s << "<line class=\"recovery-line\" x1=\"" << fx(X(x0)) << "\" x2=\"" << fx(X(x1)) << "\" y1=\"" << fx(Y(rl))
      << "\" y2=\"" << fx(Y(rl)) << "\" stroke=\"#777777\" stroke-dasharray=\"4,3\"/>\n";
  }

  // Axes.
  s << "<line x1=\"" << ml << "\" y1=\"" << fx(Y(y0)) << "\" x2=\"" << w - mr << "\" y2=\"" << fx(Y(y0))
    << "\" stroke=\"#000000\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << fx(Y(y0))
    << "\" stroke=\"#000000\"/>\n";
  for (double v = std::ceil(x0 * 5) / 5; v <= x1 + 1e-9; v += 0.2)
    s << "<text x=\"" << fx(X(v)) << "\" y=\"" << fx(Y(y0) + 16) << "\" text-anchor=\"middle\">" << fx(v)
      << "</text>\n";
  for (double v = std::ceil(y0 * 10) / 10; v <= y1 + 1e-9; v += 0.1)
    s << "<text x=\"" << ml - 6 << "\" y=\"" << fx(Y(v) + 4) << "\" text-anchor=\"end\">" << fx(v) << "</text>\n";
  s << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 8
    << "\" text-anchor=\"middle\">aggregate direction-corrected d_z</text>\n";
  s << "<text x=\"14\" y=\"" << (mt + h - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << (mt + h - mb) / 2 << ")\">mean recovery r (honest)</text>\n";

  // Grey connectors between formats of the same model.
  std::map<std::string, std::vector<const Pt*>> by_model;
  for (const auto& p : pts) by_model[p.model].push_back(&p);
  for (const auto& [m, v] : by_model)
    for (std::size_t k = 1; k < v.size(); ++k)
      s << "<line class=\"connector\" x1=\"" << fx(X(v[k - 1]->x)) << "\" y1=\"" << fx(Y(v[k - 1]->y)) << "\" x2=\""
        << fx(X(v[k]->x)) << "\" y2=\"" << fx(Y(v[k]->y)) << "\" stroke=\"#999999\"/>\n";

  for (const auto& p : pts) {
    const double cx = X(p.x), cy = Y(p.y);
    if (p.format == "gfc")
      s << "<rect class=\"point\" x=\"" << fx(cx - 5) << "\" y=\"" << fx(cy - 5)
        << "\" width=\"10\" height=\"10\" fill=\"#d95f02\"/>\n";
    else
      s << "<circle class=\"point\" cx=\"" << fx(cx) << "\" cy=\"" << fx(cy) << "\" r=\"5\" fill=\"#1b9e77\"/>\n";
    s << "<text x=\"" << fx(cx + 8) << "\" y=\"" << fx(cy - 6) << "\">" << xml_escape(p.model + " " + p.format)
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace sdrkit
