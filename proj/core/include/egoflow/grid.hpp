#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace egoflow {

/// Dense row-major 2D array.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width > 0 ? width : 0) *
                    static_cast<std::size_t>(height > 0 ? height : 0),
                fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }

    bool same_shape(int width, int height) const noexcept {
        return width_ == width && height_ == height;
    }
    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept {
        return same_shape(other.width(), other.height());
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Per-pixel boolean stored as bytes (0 or 1).
using Mask = Grid<std::uint8_t>;

std::size_t popcount(const Mask& mask);

}  // namespace egoflow
