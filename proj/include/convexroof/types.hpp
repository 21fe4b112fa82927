#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace convexroof {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A pure quantum state: complex amplitude vector of unit Euclidean norm.
using PureState = Vector;

/// Thrown when an argument violates an operation's precondition
/// (non-Hermitian input, dimension mismatch, index out of range, ...).
struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown by the line search when the objective keeps decreasing past
/// step magnitude 1e6 (objective unbounded below along the line).
struct DivergingLineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a requested problem size exceeds the dense-matrix budget.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds from a
/// single user seed so that concurrent restarts stay reproducible.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

/// Number of qubits for a power-of-two dimension.
inline int qubit_count(Index dim) {
    if (!is_power_of_two(dim))
        throw InvalidInputError("dimension " + std::to_string(dim) + " is not a power of two");
    int n = 0;
    while ((Index{1} << n) < dim) ++n;
    return n;
}

}  // namespace convexroof
