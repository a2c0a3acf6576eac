#pragma once

#include "qrnn/linalg.hpp"
#include "qrnn/quat.hpp"

namespace qrnn {

/// Split activation: one real function applied independently to each of
/// the four quaternion components.
enum class SplitActivation { identity, tanh };

const char* to_string(SplitActivation act);

/// Component-wise application of the activation to each entry.
QuatVector activate(SplitActivation act, const QuatVector& x);

/// Pseudo-derivative: each component holds the real derivative of the
/// activation at the matching input component. Consumed by the delta
/// recursions through componentwise_mul.
QuatVector pseudo_derivative(SplitActivation act, const QuatVector& x);

Quaternion activate_entry(SplitActivation act, const Quaternion& q);
Quaternion pseudo_derivative_entry(SplitActivation act, const Quaternion& q);

/// Compact derivative of a split activation: the average of the four
/// component derivatives, as a real-valued quaternion. Kept as a
/// cross-check; training uses pseudo_derivative.
Quaternion compact_ghr_derivative(SplitActivation act, const Quaternion& q);

}  // namespace qrnn
