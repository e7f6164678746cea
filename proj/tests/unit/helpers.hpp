#pragma once

#include <random>

#include "wishartlab/symcone.hpp"

namespace wltest {

using wishartlab::Matrix;
using wishartlab::PsdMatrix;
using wishartlab::SymMatrix;
using wishartlab::Vector;

inline Matrix rand_matrix(Eigen::Index d, std::mt19937_64& rng,
                          double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = normal(rng);
    return a;
}

inline SymMatrix rand_sym(Eigen::Index d, std::mt19937_64& rng,
                          double scale = 1.0) {
    return SymMatrix::symmetrized(rand_matrix(d, rng, scale));
}

// g g^T, positive semidefinite and almost surely positive definite.
inline PsdMatrix rand_pd(Eigen::Index d, std::mt19937_64& rng,
                         double scale = 1.0) {
    Matrix g = rand_matrix(d, rng, scale);
    return PsdMatrix::trusted(g * g.transpose() +
                              1e-6 * Matrix::Identity(d, d));
}

// Rank-deficient PSD matrix with the requested rank.
inline PsdMatrix rand_psd_rank(Eigen::Index d, Eigen::Index rank,
                               std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix g = Matrix::Zero(d, rank);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < rank; ++j) g(i, j) = normal(rng);
    return PsdMatrix::trusted(g * g.transpose());
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace wltest

// Asserts that `expr` throws wishartlab::Error carrying exactly `code_`.
#define CHECK_RAISES(code_, expr)                                  \
    do {                                                           \
        bool caught_expected_ = false;                             \
        try {                                                      \
            (void)(expr);                                          \
        } catch (const wishartlab::Error& err_) {                  \
            caught_expected_ = true;                               \
            CHECK_MESSAGE(err_.code() == (code_), err_.what());    \
        }                                                          \
        CHECK_MESSAGE(caught_expected_, "expected " #code_         \
                                        " from: " #expr);          \
    } while (0)
