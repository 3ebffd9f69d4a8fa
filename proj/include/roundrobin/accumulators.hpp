#pragma once

#include <cmath>
#include <cstdint>

namespace roundrobin {

/// Single-pass mean / second-central-moment accumulator (Welford) with the
/// standard pairwise merge, so partial states combine associatively.
class RunningMoments {
public:
    void push(double x) noexcept {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const RunningMoments& other) noexcept {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(other.count_);
        const double delta = other.mean_ - mean_;
        mean_ += delta * (nb / (na + nb));
        m2_ += other.m2_ + delta * delta * (na * nb / (na + nb));
        count_ += other.count_;
    }

    std::uint64_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    double variance_sample() const noexcept {
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    }
    double sd_sample() const noexcept { return std::sqrt(variance_sample()); }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Streaming covariance of a pair of observables, merge-compatible with
/// RunningMoments' scheme.
class RunningCovariance {
public:
    void push(double x, double y) noexcept {
        ++count_;
        const double inv = 1.0 / static_cast<double>(count_);
        const double dx = x - mean_x_;
        const double dy = y - mean_y_;
        mean_x_ += dx * inv;
        mean_y_ += dy * inv;
        c_xy_ += dx * (y - mean_y_);
        m2_x_ += dx * (x - mean_x_);
        m2_y_ += dy * (y - mean_y_);
    }

    void merge(const RunningCovariance& other) noexcept {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(other.count_);
        const double w = na * nb / (na + nb);
        const double dx = other.mean_x_ - mean_x_;
        const double dy = other.mean_y_ - mean_y_;
        c_xy_ += other.c_xy_ + dx * dy * w;
        m2_x_ += other.m2_x_ + dx * dx * w;
        m2_y_ += other.m2_y_ + dy * dy * w;
        mean_x_ += dx * (nb / (na + nb));
        mean_y_ += dy * (nb / (na + nb));
        count_ += other.count_;
    }

    std::uint64_t count() const noexcept { return count_; }

    /// Product-moment correlation; 0 when either margin is degenerate.
    double correlation() const noexcept {
        const double denom = std::sqrt(m2_x_ * m2_y_);
        return denom > 0.0 ? c_xy_ / denom : 0.0;
    }

private:
    std::uint64_t count_ = 0;
    double mean_x_ = 0.0;
    double mean_y_ = 0.0;
    double c_xy_ = 0.0;
    double m2_x_ = 0.0;
    double m2_y_ = 0.0;
};

}  // namespace roundrobin
