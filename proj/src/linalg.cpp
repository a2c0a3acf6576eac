#include "qrnn/linalg.hpp"

#include <sstream>

#include "qrnn/errors.hpp"

namespace qrnn {

namespace detail {
void dimension_mismatch(const std::string& op, std::size_t lhs_rows, std::size_t lhs_cols,
                        std::size_t rhs_len) {
    std::ostringstream msg;
    msg << op << ": lhs is " << lhs_rows << "x" << lhs_cols << ", rhs has length " << rhs_len;
    raise(ErrorKind::dimension_mismatch, msg.str());
}
}  // namespace detail

QuatVector matvec(const QuatMatrix& A, const QuatVector& x) {
    if (A.cols() != x.size()) detail::dimension_mismatch("matvec", A.rows(), A.cols(), x.size());
    QuatVector out(A.rows());
    for (std::size_t r = 0; r < A.rows(); ++r) {
        Quaternion acc;
        for (std::size_t c = 0; c < A.cols(); ++c) acc += hamilton_mul(A(r, c), x[c]);
        out[r] = acc;
    }
    return out;
}

QuatMatrix hermitian(const QuatMatrix& A) {
    QuatMatrix out(A.cols(), A.rows());
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t c = 0; c < A.cols(); ++c) out(c, r) = conjugate(A(r, c));
    return out;
}

QuatVector hadamard(const QuatVector& x, const QuatVector& y) {
    if (x.size() != y.size()) detail::dimension_mismatch("hadamard", x.size(), 1, y.size());
    QuatVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = hamilton_mul(x[i], y[i]);
    return out;
}

QuatVector componentwise_mul(const QuatVector& x, const QuatVector& y) {
    if (x.size() != y.size())
        detail::dimension_mismatch("componentwise_mul", x.size(), 1, y.size());
    QuatVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = {x[i].a * y[i].a, x[i].b * y[i].b, x[i].c * y[i].c, x[i].d * y[i].d};
    return out;
}

QuatVector add(const QuatVector& x, const QuatVector& y) {
    if (x.size() != y.size()) detail::dimension_mismatch("add", x.size(), 1, y.size());
    QuatVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
    return out;
}

QuatVector scale(const QuatVector& x, double s) {
    QuatVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * s;
    return out;
}

double norm_squared(const QuatVector& x) {
    double acc = 0.0;
    for (const auto& q : x) acc += modulus_squared(q);
    return acc;
}

bool all_finite(const QuatVector& x) {
    for (const auto& q : x)
        if (!q.finite()) return false;
    return true;
}

}  // namespace qrnn
