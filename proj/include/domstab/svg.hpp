#pragma once

// Minimal SVG scatter + curve plot of stability against dominance.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace domstab {

struct PlotCurve {
    std::string label;
    std::function<double(double)> f;
    bool highlight = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label = "D_c";
    std::string y_label = "S_c";
    std::vector<double> x;
    std::vector<double> y;
    std::vector<PlotCurve> curves;
    int width = 640;
    int height = 480;
    int samples = 240;
};

namespace detail {

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
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

} // namespace detail

/// One <path> per curve, one <circle> per data point; axes are <line>s.
/// Curve segments leaving the y range of the data (padded) are broken.
inline std::string render_svg(const PlotSpec& spec) {
    static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
    const double left = 60, right = 20, top = 40, bottom = 50;
    const double pw = spec.width - left - right, ph = spec.height - top - bottom;

    double xmin = 0, xmax = 1, ymin = -1, ymax = 1;
    if (!spec.x.empty()) {
        auto [xl, xh] = std::minmax_element(spec.x.begin(), spec.x.end());
        auto [yl, yh] = std::minmax_element(spec.y.begin(), spec.y.end());
        xmin = *xl, xmax = *xh, ymin = *yl, ymax = *yh;
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const double xpad = 0.05 * (xmax - xmin), ypad = 0.10 * (ymax - ymin);
    xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;

    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << detail::fmt2(left) << "\" y=\"24\" font-size=\"14\" font-family=\"sans-serif\">"
      << detail::xml_escape(spec.title) << "</text>\n";
    // axes
    o << "<line x1=\"" << detail::fmt2(left) << "\" y1=\"" << detail::fmt2(top + ph) << "\" x2=\""
      << detail::fmt2(left + pw) << "\" y2=\"" << detail::fmt2(top + ph) << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << detail::fmt2(left) << "\" y1=\"" << detail::fmt2(top) << "\" x2=\"" << detail::fmt2(left)
      << "\" y2=\"" << detail::fmt2(top + ph) << "\" stroke=\"black\"/>\n";
    if (ymin < 0 && ymax > 0)
        o << "<line x1=\"" << detail::fmt2(left) << "\" y1=\"" << detail::fmt2(sy(0)) << "\" x2=\""
          << detail::fmt2(left + pw) << "\" y2=\"" << detail::fmt2(sy(0))
          << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0, yv = ymin + (ymax - ymin) * i / 4.0;
        o << "<text x=\"" << detail::fmt2(sx(xv)) << "\" y=\"" << detail::fmt2(top + ph + 16)
          << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">" << detail::fmt2(xv)
          << "</text>\n";
        o << "<text x=\"" << detail::fmt2(left - 6) << "\" y=\"" << detail::fmt2(sy(yv) + 3)
          << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\">" << detail::fmt2(yv) << "</text>\n";
    }
    o << "<text x=\"" << detail::fmt2(left + pw / 2) << "\" y=\"" << detail::fmt2(spec.height - 12.0)
      << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\">" << detail::xml_escape(spec.x_label)
      << "</text>\n";
    o << "<text x=\"14\" y=\"" << detail::fmt2(top + ph / 2)
      << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << detail::fmt2(top + ph / 2) << ")\">" << detail::xml_escape(spec.y_label) << "</text>\n";

    for (std::size_t c = 0; c < spec.curves.size(); ++c) {
        const auto& curve = spec.curves[c];
        std::string d;
        bool pen = false;
        for (int i = 0; i <= spec.samples; ++i) {
            const double x = xmin + (xmax - xmin) * i / spec.samples;
            double y;
            try {
                y = curve.f(x);
            } catch (...) {
                y = NAN;
            }
            if (!std::isfinite(y) || y < ymin || y > ymax) {
                pen = false;
                continue;
            }
            d += pen ? " L" : (d.empty() ? "M" : " M");
            d += detail::fmt2(sx(x)) + ' ' + detail::fmt2(sy(y));
            pen = true;
        }
        if (d.empty()) d = "M" + detail::fmt2(left) + ' ' + detail::fmt2(top);
        const char* color = palette[c % 6];
        o << "<path class=\"curve\" data-model=\"" << detail::xml_escape(curve.label) << "\" d=\"" << d
          << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << (curve.highlight ? 2.5 : 1.2)
          << "\"/>\n";
        o << "<text x=\"" << detail::fmt2(left + pw - 4) << "\" y=\"" << detail::fmt2(top + 12 + 14.0 * c)
          << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\" fill=\"" << color << "\">"
          << detail::xml_escape(curve.label) << (curve.highlight ? " (selected)" : "") << "</text>\n";
    }
    for (std::size_t i = 0; i < spec.x.size(); ++i)
        o << "<circle cx=\"" << detail::fmt2(sx(spec.x[i])) << "\" cy=\"" << detail::fmt2(sy(spec.y[i]))
          << "\" r=\"3\" fill=\"black\"/>\n";
    o << "</svg>\n";
    return o.str();
}

} // namespace domstab
