#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qrnn/errors.hpp"
#include "qrnn/losses.hpp"

using namespace qrnn;

TEST_CASE("kernel config validation") {
    CHECK_THROWS_AS(KernelConfig(0.0), Error);
    CHECK_THROWS_AS(KernelConfig(-1.0), Error);
    CHECK_NOTHROW(KernelConfig(0.5));
}

TEST_CASE("mse loss") {
    CHECK(mse_loss({Quaternion::zero()}) == 0.0);
    CHECK(mse_loss({{1, 1, 1, 1}}) == 4.0);
    CHECK(mse_loss({{1, 1, 0, 0}, {0, 0, 2, 0}}) == 6.0);
}

TEST_CASE("quaternion gaussian kernel closed forms") {
    KernelConfig unit(1.0);
    double at_zero = quat_gauss_kernel({1, 2, 3, 4}, {1, 2, 3, 4}, unit);
    CHECK(at_zero == doctest::Approx(1.5957691216057308).epsilon(1e-12));

    double at_two = quat_gauss_kernel({2, 0, 0, 0}, Quaternion::zero(), unit);
    CHECK(at_two == doctest::Approx(1.5957691216057308 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(at_two == doctest::Approx(0.21596386605275225).epsilon(1e-7));

    KernelConfig half(0.5);
    Quaternion x{0, 1, 0, 0}, y{0, 0, 1, -1};  // symmetry
    CHECK(quat_gauss_kernel(x, y, half) == quat_gauss_kernel(y, x, half));
}

TEST_CASE("real gaussian kernel closed forms") {
    KernelConfig unit(1.0);
    CHECK(real_gauss_kernel(3.7, 3.7, unit) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(real_gauss_kernel(1.0, 0.0, unit) == doctest::Approx(0.24197072451914337).epsilon(1e-7));
    CHECK(real_gauss_kernel(1.0 + 3.7, 0.0 + 3.7, unit) ==
          doctest::Approx(real_gauss_kernel(1.0, 0.0, unit)).epsilon(1e-15));
}

TEST_CASE("empirical correntropy") {
    KernelConfig unit(1.0);
    std::vector<QuatVector> d = {{Quaternion{3, 1, 0, 2}}, {Quaternion{-1, 0, 0, 0}}};
    CHECK(empirical_correntropy(d, d, unit) == doctest::Approx(1.5957691216057308).epsilon(1e-12));

    std::vector<QuatVector> h = {{Quaternion{3, 1, 0, 2}}, {Quaternion{-3, 0, 0, 0}}};
    CHECK(empirical_correntropy(d, h, unit) ==
          doctest::Approx(0.5 * (1.5957691216057308 + 0.21596386605275225)).epsilon(1e-10));
    CHECK(empirical_correntropy(d, h, unit) == doctest::Approx(0.9058664938292416).epsilon(1e-7));

    // strictly decreasing in any single error modulus
    std::vector<QuatVector> h2 = h;
    h2[1][0].a -= 0.5;
    CHECK(empirical_correntropy(d, h2, unit) < empirical_correntropy(d, h, unit));

    std::vector<QuatVector> short_seq = {{Quaternion::zero()}};
    CHECK_THROWS_AS(empirical_correntropy(d, short_seq, unit), Error);
}

TEST_CASE("mcc loss values and bounds") {
    KernelConfig unit(1.0);
    std::vector<QuatVector> zeros = {{Quaternion::zero()}, {Quaternion::zero()}};
    CHECK(mcc_loss(zeros, unit) == doctest::Approx(-1.5957691216057308).epsilon(1e-12));

    std::vector<QuatVector> pair = {{Quaternion::zero()}, {Quaternion{2, 0, 0, 0}}};
    CHECK(mcc_loss(pair, unit) == doctest::Approx(-0.9058664938292416).epsilon(1e-7));

    std::vector<QuatVector> huge = {{Quaternion{30, 0, 0, 0}}};
    CHECK(mcc_loss(huge, unit) < 0.0);
    CHECK(mcc_loss(huge, unit) > -1e-190);

    CHECK_THROWS_AS(mcc_loss({}, unit), Error);
    try {
        mcc_loss({}, unit);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_sequence);
    }

    // permutation invariance
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<QuatVector> errors;
    for (int n = 0; n < 6; ++n)
        errors.push_back({Quaternion{dist(rng), dist(rng), dist(rng), dist(rng)}});
    double before = mcc_loss(errors, unit);
    std::shuffle(errors.begin(), errors.end(), rng);
    CHECK(mcc_loss(errors, unit) == doctest::Approx(before).epsilon(1e-15));
}

TEST_CASE("mcc error weight") {
    KernelConfig unit(1.0);
    CHECK(mcc_error_weight({Quaternion::zero()}, unit) == 1.0);

    // |e|^2 = 2 sigma^2 -> exp(-1)
    KernelConfig cfg(2.0);
    QuatVector e = {{std::sqrt(8.0), 0, 0, 0}};  // |e|^2 = 8 = 2 * 4
    CHECK(mcc_error_weight(e, cfg) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    KernelConfig wide(1e6);
    QuatVector ones = {{1, 1, 1, 1}};
    CHECK(std::abs(mcc_error_weight(ones, wide) - 1.0) < 1e-9);
}

TEST_CASE("kernel maximal iff arguments equal") {
    KernelConfig unit(1.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        Quaternion x{dist(rng), dist(rng), dist(rng), dist(rng)};
        Quaternion y{dist(rng), dist(rng), dist(rng), dist(rng)};
        double peak = quat_gauss_kernel(x, x, unit);
        double off = quat_gauss_kernel(x, y, unit);
        CHECK(off <= peak);
        if (modulus(x - y) > 1e-9) CHECK(off < peak);
    }
}

TEST_CASE("wide-kernel mcc ordering approaches mse ordering") {
    KernelConfig wide(1e3);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    auto random_errors = [&](std::size_t n) {
        std::vector<QuatVector> out;
        for (std::size_t t = 0; t < n; ++t)
            out.push_back({Quaternion{dist(rng), dist(rng), dist(rng), dist(rng)}});
        return out;
    };
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_errors(4), b = random_errors(4);
        double mse_a = 0.0, mse_b = 0.0;
        for (const auto& e : a) mse_a += mse_loss(e);
        for (const auto& e : b) mse_b += mse_loss(e);
        if (std::abs(mse_a - mse_b) <= 1e-6 * std::max(std::abs(mse_a), std::abs(mse_b)))
            continue;
        bool mse_order = mse_a < mse_b;
        bool mcc_order = mcc_loss(a, wide) < mcc_loss(b, wide);
        CHECK(mse_order == mcc_order);
    }
}
