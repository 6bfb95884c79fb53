#ifndef EFFNET_TENSOR_HPP
#define EFFNET_TENSOR_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "effnet/error.hpp"

namespace effnet {

// Dense 4-D extent in [batch, channels, height, width] order.
struct Shape4 {
    std::int64_t n = 1;
    std::int64_t c = 1;
    std::int64_t h = 1;
    std::int64_t w = 1;

    // Total element count; throws ShapeError on non-positive extents or
    // index-range overflow.
    std::int64_t count() const;
    // Values a single sample carries: c*h*w.
    std::int64_t floats_per_sample() const { return c * h * w; }

    bool operator==(const Shape4&) const = default;
    std::string str() const;
};

// Deterministic 64-bit generator (xoshiro256**, seeded via splitmix64).
// Identical seeds yield identical streams on every platform; distribution
// code below is self-contained so no implementation-defined behaviour leaks in.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1), 53-bit resolution.
    double next_uniform();
    double next_uniform(double lo, double hi);
    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double next_normal();
    // Unbiased integer in [0, n); n must be positive.
    std::uint64_t next_below(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
    bool have_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

// Dense 64-bit tensor in row-major NCHW order. Immutable from the caller's
// perspective once an op has produced it; ops always return fresh tensors.
struct Tensor {
    Shape4 shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape4 s) : shape(s), data(static_cast<std::size_t>(s.count()), 0.0) {}

    static Tensor zeros(Shape4 s) { return Tensor(s); }
    static Tensor constant(Shape4 s, double v);
    // Uniform in (-sqrt(6/fan_in), +sqrt(6/fan_in)).
    static Tensor he_uniform(Shape4 s, Rng& rng, std::int64_t fan_in);

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    std::int64_t index(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
        return ((n * shape.c + c) * shape.h + y) * shape.w + x;
    }
    double at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
        return data[static_cast<std::size_t>(index(n, c, y, x))];
    }
    double& at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) {
        return data[static_cast<std::size_t>(index(n, c, y, x))];
    }

    // Same flat data, new shape; element counts must match.
    Tensor reshaped(Shape4 s) const;

    bool all_finite() const;
};

} // namespace effnet

#endif // EFFNET_TENSOR_HPP
