#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ltvnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy. The CLI maps each family onto an exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration, bad arguments, violated preconditions of a call.
struct UsageError : Error {
    using Error::Error;
};

// Malformed or inconsistent data: files, dimensions, model/env mismatch.
struct DataError : Error {
    using Error::Error;
};

struct DimensionError : DataError {
    using DataError::DataError;
};

// Non-finite values, blow-ups, singular systems.
struct NumericalError : Error {
    using Error::Error;
};

inline void require_dims(bool ok, const std::string& what) {
    if (!ok) {
        throw DimensionError("dimension mismatch: " + what);
    }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Seeded source of randomness. Everything stochastic in the project draws
// from one of these so that runs are reproducible from a single integer.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// Seed for an independent stream derived from a parent seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace ltvnet
