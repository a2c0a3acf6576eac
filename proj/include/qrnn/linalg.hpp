#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qrnn/quat.hpp"

namespace qrnn {

using QuatVector = std::vector<Quaternion>;

/// Dense row-major matrix of quaternions.
class QuatMatrix {
public:
    QuatMatrix() = default;
    QuatMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Quaternion& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Quaternion& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<Quaternion>& data() { return data_; }
    const std::vector<Quaternion>& data() const { return data_; }

    bool finite() const {
        for (const auto& q : data_)
            if (!q.finite()) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Quaternion> data_;
};

/// (A x)_m = sum_n A(m,n) (x) x_n, accumulated in index order.
QuatVector matvec(const QuatMatrix& A, const QuatVector& x);

/// Conjugate transpose: hermitian(A)(n,m) = conjugate(A(m,n)).
QuatMatrix hermitian(const QuatMatrix& A);

/// Entry-wise Hamilton product, operand order preserved: out_i = x_i (x) y_i.
QuatVector hadamard(const QuatVector& x, const QuatVector& y);

/// Entry-wise product of matching real components: out_i has parts
/// (x.a*y.a, x.b*y.b, x.c*y.c, x.d*y.d). This is the per-component scaling
/// used when backpropagating through split activations; it is not the
/// Hamilton product.
QuatVector componentwise_mul(const QuatVector& x, const QuatVector& y);

QuatVector add(const QuatVector& x, const QuatVector& y);
QuatVector scale(const QuatVector& x, double s);

/// Sum over entries of |x_i|^2, i.e. the squared Euclidean norm of the
/// 4N underlying real components.
double norm_squared(const QuatVector& x);

bool all_finite(const QuatVector& x);

namespace detail {
[[noreturn]] void dimension_mismatch(const std::string& op, std::size_t lhs_rows,
                                     std::size_t lhs_cols, std::size_t rhs_len);
}

}  // namespace qrnn
