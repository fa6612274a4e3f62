#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <system_error>

#include <Eigen/Dense>

#include "egoflow/error.hpp"
#include "egoflow/io.hpp"

namespace egoflow::io {

namespace {

// Whitespace tokenizer that remembers where each token starts.
class Tokenizer {
public:
    explicit Tokenizer(std::string_view text) : text_(text) {}

    std::optional<std::string_view> next() {
        skip_space();
        if (pos_ >= text_.size()) return std::nullopt;
        start_ = pos_;
        while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
        return text_.substr(start_, pos_ - start_);
    }

    std::string_view expect(const char* what) {
        auto tok = next();
        if (!tok) throw FormatError(std::string("missing ") + what, text_.size());
        return *tok;
    }

    double number(const char* what) {
        const std::string_view tok = expect(what);
        try {
            return parse_double(tok);
        } catch (const FormatError&) {
            throw FormatError(std::string("bad ") + what + " '" + std::string(tok) + "'", start_);
        }
    }

    int integer(const char* what) {
        const std::string_view tok = expect(what);
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw FormatError(std::string("bad ") + what + " '" + std::string(tok) + "'", start_);
        return v;
    }

    /// Rest of the current line, excluding the newline.
    std::string_view line() {
        const std::size_t begin = pos_;
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        pos_ = std::min(text_.size(), end + 1);
        start_ = begin;
        return text_.substr(begin, end - begin);
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }
    std::size_t token_offset() const { return start_; }
    std::size_t offset() const { return pos_; }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t start_ = 0;
};

bool is_png(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png";
}

std::string read_text(const std::filesystem::path& path) {
    const Bytes b = read_file(path);
    return std::string(b.begin(), b.end());
}

struct Header {
    std::string kind;
    int width = 0;
    int height = 0;
};

Header parse_header(Tokenizer& tok, std::string_view expected_kind) {
    if (tok.expect("field header") != "egoflow-field")
        throw FormatError("not an egoflow text field", tok.token_offset());
    Header h;
    h.kind = std::string(tok.expect("field kind"));
    if (h.kind != expected_kind)
        throw FormatError("expected a '" + std::string(expected_kind) + "' field, found '" + h.kind +
                              "'",
                          tok.token_offset());
    h.width = tok.integer("width");
    h.height = tok.integer("height");
    if (h.width <= 0 || h.height <= 0)
        throw FormatError("field dimensions must be positive", tok.token_offset());
    return h;
}

std::string header_line(std::string_view kind, int width, int height) {
    return "egoflow-field " + std::string(kind) + " " + std::to_string(width) + " " +
           std::to_string(height) + "\n";
}

std::uint8_t parse_flag(Tokenizer& tok) {
    const std::string_view t = tok.expect("validity flag");
    if (t == "0") return 0;
    if (t == "1") return 1;
    throw FormatError("validity flag must be 0 or 1", tok.token_offset());
}

void expect_end(Tokenizer& tok) {
    if (!tok.at_end()) throw FormatError("trailing data after field", tok.offset());
}

}  // namespace

std::string format_report(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
    return std::string(buf, ptr);
}

std::string format_exact(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

double parse_double(std::string_view token) {
    double v = 0.0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || token.empty())
        throw FormatError("not a number: '" + std::string(token) + "'");
    return v;
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::kInvalidInput, "failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::kInvalidInput, "cannot rename onto " + path.string());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

StereoRig parse_calibration(std::string_view text) {
    Tokenizer tok(text);
    StereoRig rig;
    rig.intrinsics.f = tok.number("focal length");
    rig.intrinsics.cx = tok.number("cx");
    rig.intrinsics.cy = tok.number("cy");
    rig.intrinsics.width = tok.integer("width");
    rig.intrinsics.height = tok.integer("height");
    rig.baseline = tok.number("baseline");
    expect_end(tok);
    try {
        rig.validate();
    } catch (const Error& e) {
        throw FormatError(std::string("invalid calibration: ") + e.what(), 0);
    }
    return rig;
}

std::string format_calibration(const StereoRig& rig) {
    const auto& in = rig.intrinsics;
    return format_exact(in.f) + " " + format_exact(in.cx) + " " + format_exact(in.cy) + " " +
           std::to_string(in.width) + " " + std::to_string(in.height) + " " +
           format_exact(rig.baseline) + "\n";
}

StereoRig read_calibration(const std::filesystem::path& path) {
    return parse_calibration(read_text(path));
}

void write_calibration(const std::filesystem::path& path, const StereoRig& rig) {
    write_file_atomic(path, format_calibration(rig));
}

std::string format_flow_text(const FlowField& flow) {
    flow.check_shape();
    std::string out = header_line("flow", flow.width(), flow.height());
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            if (x > 0) out += ' ';
            out += format_exact(flow.u(x, y)) + ' ' + format_exact(flow.v(x, y)) + ' ' +
                   (flow.valid(x, y) ? '1' : '0');
        }
        out += '\n';
    }
    return out;
}

FlowField parse_flow_text(std::string_view text) {
    Tokenizer tok(text);
    const Header h = parse_header(tok, "flow");
    FlowField flow(h.width, h.height);
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        flow.u[i] = tok.number("flow u");
        flow.v[i] = tok.number("flow v");
        flow.valid[i] = parse_flag(tok);
    }
    expect_end(tok);
    return flow;
}

std::string format_disparity_text(const DisparityField& disp) {
    disp.check_shape();
    std::string out = header_line("disparity", disp.width(), disp.height());
    for (int y = 0; y < disp.height(); ++y) {
        for (int x = 0; x < disp.width(); ++x) {
            if (x > 0) out += ' ';
            out += format_exact(disp.d(x, y)) + ' ' + (disp.valid(x, y) ? '1' : '0');
        }
        out += '\n';
    }
    return out;
}

DisparityField parse_disparity_text(std::string_view text) {
    Tokenizer tok(text);
    const Header h = parse_header(tok, "disparity");
    DisparityField disp(h.width, h.height);
    for (std::size_t i = 0; i < disp.d.size(); ++i) {
        disp.d[i] = tok.number("disparity");
        const std::size_t at = tok.token_offset();
        disp.valid[i] = parse_flag(tok);
        if (disp.valid[i] && !(disp.d[i] > 0.0))
            throw FormatError("valid disparity must be positive", at);
    }
    expect_end(tok);
    return disp;
}

std::string format_grid_text(const Grid<double>& grid, std::string_view kind) {
    std::string out = header_line(kind, grid.width(), grid.height());
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            if (x > 0) out += ' ';
            out += format_exact(grid(x, y));
        }
        out += '\n';
    }
    return out;
}

Grid<double> parse_grid_text(std::string_view text, std::string_view kind) {
    Tokenizer tok(text);
    const Header h = parse_header(tok, kind);
    Grid<double> grid(h.width, h.height);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = tok.number("value");
    expect_end(tok);
    return grid;
}

FlowField read_flow(const std::filesystem::path& path) {
    if (is_png(path)) return decode_flow_png(read_file(path));
    return parse_flow_text(read_text(path));
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
    if (is_png(path))
        write_file_atomic(path, encode_flow_png(flow));
    else
        write_file_atomic(path, format_flow_text(flow));
}

DisparityField read_disparity(const std::filesystem::path& path) {
    if (is_png(path)) return decode_disparity_png(read_file(path));
    return parse_disparity_text(read_text(path));
}

void write_disparity(const std::filesystem::path& path, const DisparityField& disp) {
    if (is_png(path))
        write_file_atomic(path, encode_disparity_png(disp));
    else
        write_file_atomic(path, format_disparity_text(disp));
}

Mask read_mask(const std::filesystem::path& path) {
    if (is_png(path)) return decode_mask_png(read_file(path));
    const Grid<double> g = parse_grid_text(read_text(path), "mask");
    Mask m(g.width(), g.height(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) m[i] = g[i] != 0.0;
    return m;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
    if (is_png(path)) {
        write_file_atomic(path, encode_mask_png(mask));
        return;
    }
    Grid<double> g(mask.width(), mask.height());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = mask[i] ? 1.0 : 0.0;
    write_file_atomic(path, format_grid_text(g, "mask"));
}

ScalarImage read_image(const std::filesystem::path& path) {
    ScalarImage img = is_png(path) ? decode_image_png(read_file(path))
                                   : parse_grid_text(read_text(path), "image");
    try {
        check_intensity(img);
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return img;
}

void write_image(const std::filesystem::path& path, const ScalarImage& img) {
    if (is_png(path))
        write_file_atomic(path, encode_image_png(img));
    else
        write_file_atomic(path, format_grid_text(img, "image"));
}

Grid<double> read_depth_text(const std::filesystem::path& path) {
    return parse_grid_text(read_text(path), "depth");
}

ScalarImage resize_bilinear(const ScalarImage& img, int width, int height) {
    if (width <= 0 || height <= 0) throw_invalid("resize target must be non-empty");
    if (img.empty()) throw_invalid("cannot resize an empty image");
    ScalarImage out(width, height);
    const double sx = static_cast<double>(img.width()) / width;
    const double sy = static_cast<double>(img.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double wx = fx - x0;
            out(x, y) = (1 - wx) * (1 - wy) * img(x0, y0) + wx * (1 - wy) * img(x1, y0) +
                        (1 - wx) * wy * img(x0, y1) + wx * wy * img(x1, y1);
        }
    }
    return out;
}

Trajectory parse_poses(std::string_view text) {
    Trajectory traj;
    Tokenizer lines(text);
    while (!lines.at_end()) {
        const std::size_t line_start = lines.offset();
        const std::string_view line = lines.line();
        Tokenizer tok(line);
        if (tok.at_end()) continue;
        Eigen::Matrix<double, 3, 4> m;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 4; ++c) {
                try {
                    m(r, c) = tok.number("pose entry");
                } catch (const FormatError& e) {
                    throw FormatError(std::string("pose line: ") + e.what(),
                                      line_start + tok.token_offset());
                }
            }
        }
        if (!tok.at_end())
            throw FormatError("pose line has more than 12 values", line_start + tok.offset());
        const Eigen::Matrix3d r = m.leftCols<3>();
        const double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
        if (!(orth <= 1e-6) || !(r.determinant() > 0.0))
            throw FormatError("pose rotation is not orthonormal", line_start);
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
        SE3Pose pose;
        pose.rotation = svd.matrixU() * svd.matrixV().transpose();
        pose.translation = m.col(3);
        traj.poses.push_back(pose);
    }
    return traj;
}

std::string format_poses(const Trajectory& traj) {
    std::string out;
    for (const SE3Pose& p : traj.poses) {
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) out += format_exact(p.rotation(r, c)) + ' ';
            out += format_exact(p.translation[r]);
            out += r < 2 ? ' ' : '\n';
        }
    }
    return out;
}

Trajectory read_poses(const std::filesystem::path& path) { return parse_poses(read_text(path)); }

void write_poses(const std::filesystem::path& path, const Trajectory& traj) {
    write_file_atomic(path, format_poses(traj));
}

std::string format_trajectory_plot(const Trajectory& traj) {
    std::string out;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& t = traj.poses[i].translation;
        out += std::to_string(i) + ' ' + format_report(t.x()) + ' ' + format_report(t.y()) + ' ' +
               format_report(t.z()) + '\n';
    }
    return out;
}

}  // namespace egoflow::io
