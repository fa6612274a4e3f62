#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egoflow/evaluation.hpp"
#include "egoflow/fields.hpp"
#include "egoflow/geometry.hpp"

namespace egoflow::io {

using Bytes = std::vector<std::uint8_t>;

// Numbers -----------------------------------------------------------------

/// Nine significant digits, locale independent. Used for printed reports.
std::string format_report(double value);
/// Shortest representation that parses back to the same double.
std::string format_exact(double value);
/// Strict locale-independent parse of a whole token.
double parse_double(std::string_view token);

// Files -------------------------------------------------------------------

Bytes read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over the destination.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

// Calibration: one line "f cx cy width height baseline" --------------------

StereoRig parse_calibration(std::string_view text);
std::string format_calibration(const StereoRig& rig);
StereoRig read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const StereoRig& rig);

// 16-bit PNG codecs ---------------------------------------------------------

/// RGB 16-bit; u = (R - 2^15) / 64, v = (G - 2^15) / 64, valid = B in {0, 1}.
Bytes encode_flow_png(const FlowField& flow);
FlowField decode_flow_png(std::span<const std::uint8_t> png);

/// Gray 16-bit; d = value / 256, value 0 marks an invalid pixel.
Bytes encode_disparity_png(const DisparityField& disp);
DisparityField decode_disparity_png(std::span<const std::uint8_t> png);

/// Gray 8-bit, 0 or 255.
Bytes encode_mask_png(const Mask& mask);
Mask decode_mask_png(std::span<const std::uint8_t> png);

/// Gray 16-bit, intensities in [0, 1] scaled to 65535.
Bytes encode_image_png(const ScalarImage& img);
/// 8- or 16-bit gray, gray+alpha, RGB or RGBA; color is averaged to gray.
ScalarImage decode_image_png(std::span<const std::uint8_t> png);

// Plain-text fields -----------------------------------------------------------
//
// Header line "egoflow-field <kind> <width> <height>", then one line per image
// row. Kinds and per-pixel values: flow (u v valid), disparity (d valid),
// image (intensity), depth (meters).

std::string format_flow_text(const FlowField& flow);
FlowField parse_flow_text(std::string_view text);
std::string format_disparity_text(const DisparityField& disp);
DisparityField parse_disparity_text(std::string_view text);
std::string format_grid_text(const Grid<double>& grid, std::string_view kind);
Grid<double> parse_grid_text(std::string_view text, std::string_view kind);

// Path-level helpers: ".png" selects the PNG codec, anything else text ------

FlowField read_flow(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, const FlowField& flow);
DisparityField read_disparity(const std::filesystem::path& path);
void write_disparity(const std::filesystem::path& path, const DisparityField& disp);
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);
ScalarImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ScalarImage& img);
/// Depth field in meters, text format only.
Grid<double> read_depth_text(const std::filesystem::path& path);

/// Bilinear resize with half-pixel centers.
ScalarImage resize_bilinear(const ScalarImage& img, int width, int height);

// Pose files: one row-major 3x4 [R | t] per line ------------------------------

/// Rotations must be orthonormal within 1e-6 and are re-orthonormalized.
Trajectory parse_poses(std::string_view text);
std::string format_poses(const Trajectory& traj);
Trajectory read_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path, const Trajectory& traj);

/// "frame x y z" per line for plotting.
std::string format_trajectory_plot(const Trajectory& traj);

}  // namespace egoflow::io
