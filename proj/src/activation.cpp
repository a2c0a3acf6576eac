#include "qrnn/activation.hpp"

#include <cmath>

namespace qrnn {

namespace {

double f(SplitActivation act, double x) {
    return act == SplitActivation::tanh ? std::tanh(x) : x;
}

double df(SplitActivation act, double x) {
    if (act == SplitActivation::identity) return 1.0;
    double t = std::tanh(x);
    return 1.0 - t * t;
}

}  // namespace

const char* to_string(SplitActivation act) {
    return act == SplitActivation::tanh ? "tanh" : "identity";
}

Quaternion activate_entry(SplitActivation act, const Quaternion& q) {
    return {f(act, q.a), f(act, q.b), f(act, q.c), f(act, q.d)};
}

Quaternion pseudo_derivative_entry(SplitActivation act, const Quaternion& q) {
    return {df(act, q.a), df(act, q.b), df(act, q.c), df(act, q.d)};
}

QuatVector activate(SplitActivation act, const QuatVector& x) {
    QuatVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = activate_entry(act, x[i]);
    return out;
}

QuatVector pseudo_derivative(SplitActivation act, const QuatVector& x) {
    QuatVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = pseudo_derivative_entry(act, x[i]);
    return out;
}

Quaternion compact_ghr_derivative(SplitActivation act, const Quaternion& q) {
    double avg = 0.25 * (df(act, q.a) + df(act, q.b) + df(act, q.c) + df(act, q.d));
    return Quaternion::real(avg);
}

}  // namespace qrnn
