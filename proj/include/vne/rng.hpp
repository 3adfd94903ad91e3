#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace vne {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Deterministic RNG. mt19937_64 gives identical streams everywhere; the
// gaussian transform is hand-rolled Box-Muller because std::normal_distribution
// is not pinned across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1) with 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - u keeps the log argument in (0, 1]
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Mat gaussian_matrix(Eigen::Index n, Eigen::Index d) {
        Mat m(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < d; ++j) m(i, j) = gaussian();
        return m;
    }

    Vec unit_sphere(Eigen::Index d) {
        Vec v(d);
        double norm2 = 0.0;
        do {
            for (Eigen::Index j = 0; j < d; ++j) v[j] = gaussian();
            norm2 = v.squaredNorm();
        } while (norm2 < 1e-300);
        return v / std::sqrt(norm2);
    }

    // integer in [0, bound) via rejection-free modulo of a fresh draw; bound
    // is tiny compared to 2^64 so the bias is irrelevant -- but keep it exact
    // anyway with rejection sampling, it costs nothing.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("below(0)");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % bound;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace vne
