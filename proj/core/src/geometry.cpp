#include "wsnloc/geometry.hpp"

#include <algorithm>
#include <bit>
#include <numbers>
#include <span>

#include "wsnloc/random.hpp"

namespace wsnloc {

Vec2 Box::clamp(Vec2 p) const {
    return {std::clamp(p.x, xmin, xmax), std::clamp(p.y, ymin, ymax)};
}

Gaussian2::Gaussian2(Mat2 cov) : cov_(cov) {
    double jitter = std::max(1e-12, 1e-9 * std::abs(cov_.trace()));
    while (!(cov_.xx > 0.0 && cov_.det() > 0.0)) {
        cov_ = cov_ + Mat2::identity(jitter);
        jitter *= 10.0;
    }
    const double det = cov_.det();
    inv_ = {cov_.yy / det, -cov_.xy / det, cov_.xx / det};
    norm_ = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
    log_norm_ = std::log(norm_);
    l11_ = std::sqrt(cov_.xx);
    l21_ = cov_.xy / l11_;
    l22_ = std::sqrt(std::max(cov_.yy - l21_ * l21_, 0.0));
}

std::uint64_t hash_doubles(std::uint64_t seed, std::span<const double> values) {
    std::uint64_t h = mix64(seed ^ values.size());
    for (double v : values) {
        // +0.0 and -0.0 hash the same.
        if (v == 0.0) v = 0.0;
        h = hash_combine(h, std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

}  // namespace wsnloc
