#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <csetjmp>
#include <cstring>
#include <string>

#include "egoflow/error.hpp"
#include "egoflow/io.hpp"

namespace egoflow::io {

namespace {

// IHDR byte positions inside a PNG stream.
constexpr std::size_t kBitDepthOffset = 24;
constexpr std::size_t kColorTypeOffset = 25;

struct ErrorContext {
    char message[256] = "libpng error";
};

void on_error(png_structp png, png_const_charp msg) {
    auto* ctx = static_cast<ErrorContext*>(png_get_error_ptr(png));
    std::snprintf(ctx->message, sizeof(ctx->message), "%s", msg);
    longjmp(png_jmpbuf(png), 1);
}

void on_warning(png_structp, png_const_charp) {}

struct ReadState {
    std::span<const std::uint8_t> data;
    std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t n) {
    auto* s = static_cast<ReadState*>(png_get_io_ptr(png));
    if (s->offset + n > s->data.size()) png_error(png, "unexpected end of PNG data");
    std::memcpy(out, s->data.data() + s->offset, n);
    s->offset += n;
}

void write_callback(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

void flush_callback(png_structp) {}

struct RawPng {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    int color_type = 0;
    int channels = 0;
    std::vector<std::uint16_t> samples;  // row-major, interleaved channels
};

// Decodes a PNG. With expand set, palette and sub-byte images are widened to
// 8-bit and the caller sees the post-transform layout.
RawPng decode_raw(std::span<const std::uint8_t> data, bool expand) {
    if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0)
        throw FormatError("missing PNG signature", 0);

    ErrorContext ctx;
    ReadState state{data, 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, on_error, on_warning);
    if (png == nullptr) throw Error(ErrorCode::kFormat, "cannot allocate PNG reader");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorCode::kFormat, "cannot allocate PNG info");
    }

    RawPng out;
    Bytes buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(ctx.message, state.offset);
    }
    png_set_read_fn(png, &state, read_callback);
    png_read_info(png, info);
    if (expand) {
        png_set_expand(png);
        png_read_update_info(png, info);
    }
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.bit_depth = png_get_bit_depth(png, info);
    out.color_type = png_get_color_type(png, info);
    out.channels = png_get_channels(png, info);
    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + row_bytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t count =
        static_cast<std::size_t>(out.width) * out.height * static_cast<std::size_t>(out.channels);
    out.samples.resize(count);
    if (out.bit_depth == 16) {
        for (std::size_t i = 0; i < count; ++i)
            out.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    } else if (out.bit_depth == 8) {
        for (std::size_t i = 0; i < count; ++i) out.samples[i] = buffer[i];
    } else {
        throw FormatError("unsupported bit depth " + std::to_string(out.bit_depth),
                          kBitDepthOffset);
    }
    return out;
}

Bytes encode_raw(int width, int height, int bit_depth, int color_type, int channels,
                 const std::vector<std::uint16_t>& samples) {
    if (width <= 0 || height <= 0) throw_invalid("cannot encode an empty image");
    const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
    const std::size_t row_bytes = static_cast<std::size_t>(width) * channels * bytes_per_sample;
    Bytes buffer(row_bytes * static_cast<std::size_t>(height));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (bytes_per_sample == 2) {
            buffer[2 * i] = static_cast<std::uint8_t>(samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<std::uint8_t>(samples[i] & 0xff);
        } else {
            buffer[i] = static_cast<std::uint8_t>(samples[i]);
        }
    }

    ErrorContext ctx;
    Bytes out;
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) rows[y] = buffer.data() + row_bytes * y;

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, on_error, on_warning);
    if (png == nullptr) throw Error(ErrorCode::kFormat, "cannot allocate PNG writer");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorCode::kFormat, "cannot allocate PNG info");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::kFormat, std::string("PNG encoding failed: ") + ctx.message);
    }
    png_set_write_fn(png, &out, write_callback, flush_callback);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void expect_layout(const RawPng& raw, int bit_depth, int color_type, const char* what) {
    if (raw.bit_depth != bit_depth)
        throw FormatError(std::string(what) + ": expected " + std::to_string(bit_depth) +
                              "-bit PNG, found " + std::to_string(raw.bit_depth) + "-bit",
                          kBitDepthOffset);
    if (raw.color_type != color_type)
        throw FormatError(std::string(what) + ": unexpected PNG color type " +
                              std::to_string(raw.color_type),
                          kColorTypeOffset);
}

std::uint16_t quantize(double value, double scale, double offset, double lo, double hi) {
    if (!std::isfinite(value)) value = 0.0;
    const double q = std::nearbyint(value * scale + offset);
    return static_cast<std::uint16_t>(std::clamp(q, lo, hi));
}

}  // namespace

Bytes encode_flow_png(const FlowField& flow) {
    flow.check_shape();
    std::vector<std::uint16_t> samples(flow.u.size() * 3);
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        samples[3 * i] = quantize(flow.u[i], 64.0, 32768.0, 0.0, 65535.0);
        samples[3 * i + 1] = quantize(flow.v[i], 64.0, 32768.0, 0.0, 65535.0);
        samples[3 * i + 2] = flow.valid[i] ? 1 : 0;
    }
    return encode_raw(flow.width(), flow.height(), 16, PNG_COLOR_TYPE_RGB, 3, samples);
}

FlowField decode_flow_png(std::span<const std::uint8_t> png) {
    const RawPng raw = decode_raw(png, false);
    expect_layout(raw, 16, PNG_COLOR_TYPE_RGB, "flow");
    FlowField flow(raw.width, raw.height);
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        const std::uint16_t valid = raw.samples[3 * i + 2];
        if (valid > 1)
            throw FormatError("flow: validity channel must be 0 or 1, found " +
                              std::to_string(valid) + " at pixel " + std::to_string(i));
        flow.u[i] = (static_cast<double>(raw.samples[3 * i]) - 32768.0) / 64.0;
        flow.v[i] = (static_cast<double>(raw.samples[3 * i + 1]) - 32768.0) / 64.0;
        flow.valid[i] = static_cast<std::uint8_t>(valid);
    }
    return flow;
}

Bytes encode_disparity_png(const DisparityField& disp) {
    disp.check_shape();
    std::vector<std::uint16_t> samples(disp.d.size());
    for (std::size_t i = 0; i < disp.d.size(); ++i)
        samples[i] = disp.valid[i] && disp.d[i] > 0.0
                         ? quantize(disp.d[i], 256.0, 0.0, 1.0, 65535.0)
                         : std::uint16_t{0};
    return encode_raw(disp.width(), disp.height(), 16, PNG_COLOR_TYPE_GRAY, 1, samples);
}

DisparityField decode_disparity_png(std::span<const std::uint8_t> png) {
    const RawPng raw = decode_raw(png, false);
    expect_layout(raw, 16, PNG_COLOR_TYPE_GRAY, "disparity");
    DisparityField disp(raw.width, raw.height);
    for (std::size_t i = 0; i < disp.d.size(); ++i) {
        disp.d[i] = static_cast<double>(raw.samples[i]) / 256.0;
        disp.valid[i] = raw.samples[i] != 0;
    }
    return disp;
}

Bytes encode_mask_png(const Mask& mask) {
    std::vector<std::uint16_t> samples(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) samples[i] = mask[i] ? 255 : 0;
    return encode_raw(mask.width(), mask.height(), 8, PNG_COLOR_TYPE_GRAY, 1, samples);
}

Mask decode_mask_png(std::span<const std::uint8_t> png) {
    const RawPng raw = decode_raw(png, true);
    if (raw.channels != 1) throw FormatError("mask: expected a single-channel PNG", kColorTypeOffset);
    Mask mask(raw.width, raw.height, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = raw.samples[i] != 0;
    return mask;
}

Bytes encode_image_png(const ScalarImage& img) {
    std::vector<std::uint16_t> samples(img.size());
    for (std::size_t i = 0; i < img.size(); ++i)
        samples[i] = quantize(std::clamp(img[i], 0.0, 1.0), 65535.0, 0.0, 0.0, 65535.0);
    return encode_raw(img.width(), img.height(), 16, PNG_COLOR_TYPE_GRAY, 1, samples);
}

ScalarImage decode_image_png(std::span<const std::uint8_t> png) {
    const RawPng raw = decode_raw(png, true);
    const double full = raw.bit_depth == 16 ? 65535.0 : 255.0;
    const bool has_alpha = (raw.color_type & PNG_COLOR_MASK_ALPHA) != 0;
    const int color = has_alpha ? raw.channels - 1 : raw.channels;
    ScalarImage img(raw.width, raw.height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        double s = 0.0;
        for (int c = 0; c < color; ++c) s += raw.samples[i * raw.channels + c];
        img[i] = s / (color * full);
    }
    return img;
}

}  // namespace egoflow::io
