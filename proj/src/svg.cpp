#include "agri/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace agri {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 160;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string fmt(const char* spec, double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (const char c : s) {
        if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else if (c == '&')
            out += "&amp;";
        else
            out += c;
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void take(double v)
    {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void settle()
    {
        if (!std::isfinite(lo)) {
            lo = 0;
            hi = 1;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

std::string header(const std::string& title)
{
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kWidth) + "\" height=\"" +
           fmt("%.0f", kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" + fmt("%.0f", kWidth / 2) +
           "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
}

std::string y_axis(const Range& y, double plot_h)
{
    std::string s;
    for (int i = 0; i <= 5; ++i) {
        const double v = y.lo + (y.hi - y.lo) * i / 5.0;
        const double py = kTop + plot_h - plot_h * i / 5.0;
        s += "<line x1=\"" + fmt("%.1f", kLeft) + "\" x2=\"" + fmt("%.1f", kWidth - kRight) + "\" y1=\"" +
             fmt("%.1f", py) + "\" y2=\"" + fmt("%.1f", py) + "\" stroke=\"#ddd\"/>\n";
        s += "<text x=\"" + fmt("%.1f", kLeft - 6) + "\" y=\"" + fmt("%.1f", py + 4) + "\" text-anchor=\"end\">" +
             fmt("%.4g", v) + "</text>\n";
    }
    return s;
}

std::string legend(const std::vector<Series>& series)
{
    std::string s;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double ly = kTop + 16.0 * static_cast<double>(i);
        const char* color = kPalette[i % std::size(kPalette)];
        s += "<rect x=\"" + fmt("%.1f", kWidth - kRight + 12) + "\" y=\"" + fmt("%.1f", ly) +
             "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
        s += "<text x=\"" + fmt("%.1f", kWidth - kRight + 28) + "\" y=\"" + fmt("%.1f", ly + 9) + "\">" +
             escape(series[i].name) + "</text>\n";
    }
    return s;
}

} // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series)
{
    Range xr;
    Range yr;
    for (const Series& s : series) {
        for (const double v : s.x)
            xr.take(v);
        for (const double v : s.y)
            yr.take(v);
    }
    xr.settle();
    yr.settle();

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto px = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    const auto py = [&](double v) { return kTop + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    std::string svg = header(title) + y_axis(yr, plot_h);
    for (int i = 0; i <= 5; ++i) {
        const double v = xr.lo + (xr.hi - xr.lo) * i / 5.0;
        svg += "<text x=\"" + fmt("%.1f", px(v)) + "\" y=\"" + fmt("%.1f", kTop + plot_h + 16) +
               "\" text-anchor=\"middle\">" + fmt("%.4g", v) + "</text>\n";
    }
    svg += "<text x=\"" + fmt("%.1f", kLeft + plot_w / 2) + "\" y=\"" + fmt("%.1f", kHeight - 10) +
           "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    svg += "<text transform=\"translate(16," + fmt("%.1f", kTop + plot_h / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const Series& s = series[i];
        std::string pts;
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t k = 0; k < n; ++k)
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k]))
                pts += fmt("%.2f", px(s.x[k])) + "," + fmt("%.2f", py(s.y[k])) + " ";
        svg += "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" +
               std::string(kPalette[i % std::size(kPalette)]) + "\" points=\"" + pts + "\"/>\n";
    }
    svg += legend(series) + "</svg>\n";
    return svg;
}

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<Series>& series)
{
    Range yr;
    yr.take(0);
    for (const Series& s : series)
        for (const double v : s.y)
            yr.take(v);
    yr.settle();

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto py = [&](double v) { return kTop + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    std::string svg = header(title) + y_axis(yr, plot_h);
    const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(categories.size(), 1));
    const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const double gx = kLeft + group_w * static_cast<double>(c);
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (c >= series[i].y.size() || !std::isfinite(series[i].y[c]))
                continue;
            const double v = series[i].y[c];
            const double top = std::min(py(v), py(0));
            const double h = std::abs(py(v) - py(0));
            svg += "<rect x=\"" + fmt("%.2f", gx + group_w * 0.1 + bar_w * static_cast<double>(i)) + "\" y=\"" +
                   fmt("%.2f", top) + "\" width=\"" + fmt("%.2f", bar_w) + "\" height=\"" + fmt("%.2f", h) +
                   "\" fill=\"" + kPalette[i % std::size(kPalette)] + "\"/>\n";
        }
        svg += "<text x=\"" + fmt("%.1f", gx + group_w / 2) + "\" y=\"" + fmt("%.1f", kTop + plot_h + 16) +
               "\" text-anchor=\"middle\">" + escape(categories[c]) + "</text>\n";
    }
    svg += legend(series) + "</svg>\n";
    return svg;
}

} // namespace agri
