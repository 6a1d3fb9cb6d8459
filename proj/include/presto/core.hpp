#pragma once

// Shared building blocks: error types, deterministic random streams and a
// row-major feature matrix.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace presto {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration (usage errors).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or out-of-range data.
class DataError : public Error {
public:
    using Error::Error;
};

/// A numerical invariant that should hold by construction did not.
class InvariantError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline bool& warnings_enabled() {
    static bool enabled = true;
    return enabled;
}

inline void warn(const std::string& message) {
    if (warnings_enabled()) {
        std::clog << "[presto] warning: " << message << '\n';
    }
}

}  // namespace detail

/// Silences library warnings (used by tests and benchmarks).
inline void set_warnings_enabled(bool enabled) { detail::warnings_enabled() = enabled; }

inline constexpr double kNormalizationTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// xoshiro256** generator with portable, bit-reproducible helpers. The
/// standard distributions are implementation-defined, so uniform doubles and
/// bounded integers are derived here directly from the raw 64-bit output.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x = splitmix64(x);
            word = x;
        }
    }

    /// Independent stream for slot `index` of a run seeded with `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(splitmix64(seed + index));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
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

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound), bound > 0 (rejection sampling, unbiased).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = (*this)();
            if (r >= threshold) {
                return r % bound;
            }
        }
    }

    /// Standard normal draw (Box-Muller, one value per call).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    /// `count` distinct indices from [0, population), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count) {
        if (count > population) {
            throw ConfigError("sample size " + std::to_string(count) + " exceeds population " +
                              std::to_string(population));
        }
        std::vector<std::size_t> pool(population);
        for (std::size_t i = 0; i < population; ++i) {
            pool[i] = i;
        }
        for (std::size_t i = 0; i < count; ++i) {
            const auto j = i + static_cast<std::size_t>(below(population - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(count);
        return pool;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
};

// ---------------------------------------------------------------------------
// Feature matrix
// ---------------------------------------------------------------------------

/// Dense row-major matrix of numeric features. NaN marks a missing value.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    FeatureMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_) {
            throw DataError("feature matrix storage has " + std::to_string(values_.size()) +
                            " values, expected " + std::to_string(rows_ * cols_));
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

    const std::vector<double>& values() const { return values_; }

    /// Copy of the given rows, in the given order.
    FeatureMatrix select_rows(std::span<const std::size_t> indices) const {
        FeatureMatrix out(indices.size(), cols_);
        for (std::size_t r = 0; r < indices.size(); ++r) {
            const auto src = row(indices[r]);
            std::copy(src.begin(), src.end(), out.row(r).begin());
        }
        return out;
    }

    /// Rows of `*this` followed by rows of `other`.
    FeatureMatrix stacked(const FeatureMatrix& other) const {
        if (rows_ > 0 && other.rows_ > 0 && other.cols_ != cols_) {
            throw DataError("cannot stack matrices with " + std::to_string(cols_) + " and " +
                            std::to_string(other.cols_) + " columns");
        }
        std::vector<double> values = values_;
        values.insert(values.end(), other.values_.begin(), other.values_.end());
        const std::size_t cols = rows_ > 0 ? cols_ : other.cols_;
        return FeatureMatrix(rows_ + other.rows_, cols, std::move(values));
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

template <typename T>
std::vector<T> select(std::span<const T> values, std::span<const std::size_t> indices) {
    std::vector<T> out;
    out.reserve(indices.size());
    for (const auto i : indices) {
        out.push_back(values[i]);
    }
    return out;
}

}  // namespace presto
