#pragma once

#include "egoflow/grid.hpp"

namespace egoflow {

/// Dense optical flow in pixels. Invalid pixels carry no semantic value.
struct FlowField {
    Grid<double> u;
    Grid<double> v;
    Mask valid;

    FlowField() = default;
    FlowField(int width, int height)
        : u(width, height), v(width, height), valid(width, height, 1) {}

    int width() const noexcept { return u.width(); }
    int height() const noexcept { return u.height(); }
    /// Throws kInvalidInput when the component grids disagree in shape.
    void check_shape() const;

    friend bool operator==(const FlowField&, const FlowField&) = default;
};

/// Dense disparity in pixels; valid pixels have d > 0.
struct DisparityField {
    Grid<double> d;
    Mask valid;

    DisparityField() = default;
    DisparityField(int width, int height) : d(width, height), valid(width, height, 1) {}

    int width() const noexcept { return d.width(); }
    int height() const noexcept { return d.height(); }
    void check_shape() const;

    friend bool operator==(const DisparityField&, const DisparityField&) = default;
};

/// Grayscale intensities in [0, 1].
using ScalarImage = Grid<double>;

/// Throws kInvalidInput if any intensity is non-finite or outside [0, 1].
void check_intensity(const ScalarImage& img);

/// Generic warp x -> x + offset(x), in pixels.
struct WarpField {
    Grid<double> du;
    Grid<double> dv;

    WarpField() = default;
    WarpField(int width, int height) : du(width, height), dv(width, height) {}

    int width() const noexcept { return du.width(); }
    int height() const noexcept { return du.height(); }

    /// Flow as a warp; invalid pixels get a zero offset.
    static WarpField from_flow(const FlowField& flow);
    /// Disparity as a horizontal warp with offset (sign * d, 0); invalid pixels
    /// get a zero offset. Left-to-right uses sign = -1, right-to-left +1.
    static WarpField from_disparity(const DisparityField& disp, double sign);
};

}  // namespace egoflow
