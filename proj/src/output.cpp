#include "bayesun/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "bayesun/checkpoint.hpp"

namespace bayesun::io {

std::string predictive_csv(const PredictiveTable& t) {
  std::string out = "x,mean,std_epistemic,std_total\n";
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    out += format_double(t.x[i]) + "," + format_double(t.mean[i]) + "," + format_double(t.std_epistemic[i]) +
           "," + format_double(t.std_total[i]) + "\n";
  }
  return out;
}

PredictiveTable parse_predictive_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "x,mean,std_epistemic,std_total") {
    throw ParseError(origin, "line 1", "expected header 'x,mean,std_epistemic,std_total'");
  }
  PredictiveTable t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[4];
    const char* p = line.c_str();
    for (int k = 0; k < 4; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(p, &end);
      if (end == p || (k < 3 && *end != ',') || (k == 3 && *end != '\0')) {
        throw ParseError(origin, "line " + std::to_string(lineno), "malformed row");
      }
      p = end + 1;
    }
    t.x.push_back(v[0]);
    t.mean.push_back(v[1]);
    t.std_epistemic.push_back(v[2]);
    t.std_total.push_back(v[3]);
  }
  return t;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string predictive_svg(const PredictiveTable& t, const Dataset* data, const std::string& title) {
  const double width = 640.0;
  const double height = 400.0;
  const double margin = 40.0;
  if (t.x.empty()) throw std::invalid_argument("predictive_svg: empty table");

  double x0 = t.x.front();
  double x1 = t.x.back();
  double y0 = 1e300;
  double y1 = -1e300;
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    y0 = std::min(y0, t.mean[i] - 2.0 * t.std_total[i]);
    y1 = std::max(y1, t.mean[i] + 2.0 * t.std_total[i]);
  }
  if (data) {
    for (std::size_t i = 0; i < data->size(); ++i) {
      x0 = std::min(x0, data->x[i]);
      x1 = std::max(x1, data->x[i]);
      y0 = std::min(y0, data->y[i]);
      y1 = std::max(y1, data->y[i]);
    }
  }
  if (!std::isfinite(y0) || !std::isfinite(y1)) {
    y0 = -1.0;
    y1 = 1.0;
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  auto px = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
  auto py = [&](double y) { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title
    << "</text>\n";

  s << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    s << fmt(px(t.x[i])) << "," << fmt(py(t.mean[i] + 2.0 * t.std_total[i])) << " ";
  }
  for (std::size_t i = t.x.size(); i-- > 0;) {
    s << fmt(px(t.x[i])) << "," << fmt(py(t.mean[i] - 2.0 * t.std_total[i])) << " ";
  }
  s << "\"/>\n";

  s << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < t.x.size(); ++i) s << fmt(px(t.x[i])) << "," << fmt(py(t.mean[i])) << " ";
  s << "\"/>\n";

  if (data) {
    for (std::size_t i = 0; i < data->size(); ++i) {
      s << "<circle cx=\"" << fmt(px(data->x[i])) << "\" cy=\"" << fmt(py(data->y[i]))
        << "\" r=\"2\" fill=\"#d62728\"/>\n";
    }
  }
  s << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
    << height - margin << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << margin << "\" y=\"" << height - 10 << "\" font-size=\"11\">" << fmt(x0) << "</text>\n";
  s << "<text x=\"" << width - margin << "\" y=\"" << height - 10 << "\" font-size=\"11\" text-anchor=\"end\">"
    << fmt(x1) << "</text>\n";
  s << "<text x=\"4\" y=\"" << py(y0) << "\" font-size=\"11\">" << fmt(y0) << "</text>\n";
  s << "<text x=\"4\" y=\"" << py(y1) + 10 << "\" font-size=\"11\">" << fmt(y1) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace bayesun::io
