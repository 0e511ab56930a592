#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sartts {

// Dense row-major matrix of doubles. All arithmetic accumulates in 64-bit
// floating point. Entries are validated finite when constructed from data.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, rows*cols entries

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0);
    Matrix(std::size_t r, std::size_t c, std::vector<double> d);

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool operator==(const Matrix& o) const = default;
};

struct Vector {
    std::size_t dim = 0;
    std::vector<double> data;

    Vector() = default;
    explicit Vector(std::size_t n, double fill = 0.0);
    explicit Vector(std::vector<double> d);
    Vector(std::initializer_list<double> d) : Vector(std::vector<double>(d)) {}

    bool operator==(const Vector& o) const = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);

// Row-wise softmax with max subtraction for stability.
Matrix softmax_rows(const Matrix& m);

// Column means; one entry per column.
Vector mean_pool_rows(const Matrix& m);

// Cosine similarity, clamped to [-1, 1].
double cosine_similarity(const Vector& a, const Vector& b);

double norm(const Vector& v);
double dot(const Vector& a, const Vector& b);

// Splitmix-style seeded uniform sampling; deterministic across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n), n > 0.
    std::size_t below(std::size_t n);

private:
    std::uint64_t state_;
};

}  // namespace sartts
