#include "effnet/tensor.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace effnet {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    if (a != 0 && b > std::numeric_limits<std::int64_t>::max() / a) {
        throw ShapeError("tensor element count overflows the index range");
    }
    return a * b;
}

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

} // namespace

std::int64_t Shape4::count() const {
    if (n < 1 || c < 1 || h < 1 || w < 1) {
        throw ShapeError("all four tensor extents must be >= 1, got " + str());
    }
    return checked_mul(checked_mul(checked_mul(n, c), h), w);
}

std::string Shape4::str() const {
    std::ostringstream os;
    os << "(" << n << "," << c << "," << h << "," << w << ")";
    return os.str();
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) {
        s = splitmix64(sm);
    }
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
}

double Rng::next_normal() {
    if (have_spare_normal_) {
        have_spare_normal_ = false;
        return spare_normal_;
    }
    // Box-Muller; u1 is kept away from 0 so the log stays finite.
    double u1 = 0.0;
    do {
        u1 = next_uniform();
    } while (u1 <= 0.0);
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_normal_ = r * std::sin(theta);
    have_spare_normal_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) {
        throw Error("next_below requires n > 0");
    }
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % n;
        }
    }
}

Tensor Tensor::constant(Shape4 s, double v) {
    Tensor t(s);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
}

Tensor Tensor::he_uniform(Shape4 s, Rng& rng, std::int64_t fan_in) {
    if (fan_in < 1) {
        throw Error("he_uniform requires fan_in >= 1");
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Tensor t(s);
    for (auto& v : t.data) {
        v = rng.next_uniform(-bound, bound);
    }
    return t;
}

Tensor Tensor::reshaped(Shape4 s) const {
    if (s.count() != shape.count()) {
        throw ShapeError("reshape element count mismatch: " + shape.str() + " -> " + s.str());
    }
    Tensor t;
    t.shape = s;
    t.data = data;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

} // namespace effnet
