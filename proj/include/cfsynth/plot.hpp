#pragma once

// Minimal SVG line plots: one polyline per series on a fixed 800x600 canvas.

#include "cfsynth/simulator.hpp"

#include <string>
#include <vector>

namespace cfs
{

struct Series
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec
{
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Returns a standalone SVG document. Non-finite points are dropped.
std::string render_svg(const PlotSpec& spec);

PlotSpec theta_plot(const Trajectory& traj);
PlotSpec control_norm_plot(const Trajectory& traj);
PlotSpec phase_plot(const Trajectory& traj); // x1 against x2

} // namespace cfs
