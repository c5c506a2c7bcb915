#include "cfsynth/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cfs
{
namespace
{

constexpr double width = 800.0;
constexpr double height = 600.0;
constexpr double left = 80.0;
constexpr double right = 30.0;
constexpr double top = 50.0;
constexpr double bottom = 60.0;

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char ch : s)
    {
        switch (ch)
        {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

struct Range
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        if (!std::isfinite(v))
            return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    void settle()
    {
        if (!(lo <= hi))
        {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi)))
        {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

} // namespace

std::string render_svg(const PlotSpec& spec)
{
    Range xr, yr;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
            {
                xr.add(s.x[i]);
                yr.add(s.y[i]);
            }
    xr.settle();
    yr.settle();
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto px = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double v) { return top + (yr.hi - v) / (yr.hi - yr.lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
    os << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    os << "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">" << escape(spec.title)
       << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 4; ++k)
    {
        const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(height - bottom + 18)
           << "\" text-anchor=\"middle\" font-size=\"12\">" << fmt(xv) << "</text>\n";
        os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(yv) + 4)
           << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(yv) << "</text>\n";
    }
    os << "<text x=\"400\" y=\"" << fmt(height - 15) << "\" text-anchor=\"middle\" font-size=\"14\">"
       << escape(spec.x_label) << "</text>\n";
    os << "<text x=\"20\" y=\"300\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 300)\">"
       << escape(spec.y_label) << "</text>\n";

    std::size_t idx = 0;
    for (const auto& s : spec.series)
    {
        const char* colour = palette[idx % (sizeof palette / sizeof palette[0])];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
        {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            os << (first ? "" : " ") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
            first = false;
        }
        os << "\"/>\n";
        if (!s.label.empty())
            os << "<text x=\"" << fmt(width - right - 10) << "\" y=\"" << fmt(top + 18 + 16.0 * idx)
               << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << colour << "\">"
               << escape(s.label) << "</text>\n";
        ++idx;
    }
    os << "</svg>\n";
    return os.str();
}

PlotSpec theta_plot(const Trajectory& traj)
{
    Series s{"theta", {}, {}};
    for (const auto& p : traj.samples)
    {
        s.x.push_back(p.t);
        s.y.push_back(p.theta);
    }
    return {"Controllability function", "t", "theta", {s}};
}

PlotSpec control_norm_plot(const Trajectory& traj)
{
    Series s{"|u|", {}, {}};
    for (const auto& p : traj.samples)
    {
        s.x.push_back(p.t);
        s.y.push_back(p.u.norm());
    }
    return {"Norm of the control", "t", "|u|", {s}};
}

PlotSpec phase_plot(const Trajectory& traj)
{
    Series s{"", {}, {}};
    for (const auto& p : traj.samples)
    {
        if (p.x.size() < 2)
            break;
        s.x.push_back(p.x(0));
        s.y.push_back(p.x(1));
    }
    return {"Phase projection", "x1", "x2", {s}};
}

} // namespace cfs
