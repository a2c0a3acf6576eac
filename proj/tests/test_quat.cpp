#include <doctest.h>

#include <random>

#include "qrnn/errors.hpp"
#include "qrnn/linalg.hpp"
#include "qrnn/quat.hpp"

using namespace qrnn;

namespace {

Quaternion random_quat(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    return {dist(rng), dist(rng), dist(rng), dist(rng)};
}

bool close(const Quaternion& p, const Quaternion& q, double tol = 1e-12) {
    return modulus(p - q) <= tol * std::max(1.0, std::max(modulus(p), modulus(q)));
}

// rotate computed the long way, mu q mu^{-1}, as an independent check on the
// sign-flip implementation.
Quaternion rotate_by_products(const Quaternion& q, Involution mu) {
    Quaternion u = involution_unit(mu);
    return hamilton_mul(hamilton_mul(u, q), inverse(u));
}

}  // namespace

TEST_CASE("hamilton product defining relations") {
    const Quaternion one = Quaternion::one(), i = Quaternion::unit_i(), j = Quaternion::unit_j(),
                     k = Quaternion::unit_k();
    CHECK(hamilton_mul(i, j) == k);
    CHECK(hamilton_mul(j, k) == i);
    CHECK(hamilton_mul(k, i) == j);
    CHECK(hamilton_mul(j, i) == -k);
    CHECK(hamilton_mul(k, j) == -i);
    CHECK(hamilton_mul(i, k) == -j);
    CHECK(hamilton_mul(i, i) == -one);
    CHECK(hamilton_mul(j, j) == -one);
    CHECK(hamilton_mul(k, k) == -one);
    CHECK(hamilton_mul(hamilton_mul(i, j), k) == -one);  // ijk = -1

    // full 4x4 table against the unit relations
    const Quaternion units[4] = {one, i, j, k};
    const Quaternion expected[4][4] = {
        {one, i, j, k},
        {i, -one, k, -j},
        {j, -k, -one, i},
        {k, j, -i, -one},
    };
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) CHECK(hamilton_mul(units[r], units[c]) == expected[r][c]);
}

TEST_CASE("hamilton product expansion example") {
    Quaternion lhs = hamilton_mul({1, 1, 0, 0}, {1, 0, 1, 0});  // (1+i)(1+j)
    CHECK(lhs == Quaternion{1, 1, 1, 1});
}

TEST_CASE("conjugate, modulus, inverse") {
    Quaternion q{1, 1, 1, 1};
    CHECK(conjugate(q) == Quaternion{1, -1, -1, -1});
    CHECK(modulus(q) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(close(inverse({1, 1, 0, 0}), {0.5, -0.5, 0, 0}));
    CHECK_THROWS_AS(inverse(Quaternion::zero()), Error);
    try {
        inverse(Quaternion::zero());
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain_error);
    }
}

TEST_CASE("rotate sign flips and identity") {
    Quaternion q{1, 1, 1, 1};
    CHECK(rotate(q, Involution::i) == Quaternion{1, 1, -1, -1});
    CHECK(rotate(q, Involution::j) == Quaternion{1, -1, 1, -1});
    CHECK(rotate(q, Involution::k) == Quaternion{1, -1, -1, 1});
    CHECK(rotate(q, Involution::one) == q);

    Quaternion p{2, 3, -1, 5};
    CHECK(rotate(rotate(p, Involution::j), Involution::j) == p);
    // brute-force oracle via products
    for (Involution mu : kInvolutions) CHECK(close(rotate(p, mu), rotate_by_products(p, mu)));
}

TEST_CASE("algebra properties on random quaternions") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        Quaternion p = random_quat(rng), q = random_quat(rng);
        CHECK(std::abs(modulus(hamilton_mul(p, q)) - modulus(p) * modulus(q)) <=
              1e-12 * std::max(1.0, modulus(p) * modulus(q)));
        CHECK(close(conjugate(hamilton_mul(p, q)),
                    hamilton_mul(conjugate(q), conjugate(p))));
        if (modulus(q) > 1e-6)
            CHECK(close(hamilton_mul(q, inverse(q)), Quaternion::one(), 1e-12));
        for (Involution mu : kInvolutions) {
            CHECK(close(rotate(hamilton_mul(p, q), mu),
                        hamilton_mul(rotate(p, mu), rotate(q, mu))));
            CHECK(rotate(rotate(p, mu), mu) == p);
        }
    }
    // noncommutativity witness
    CHECK(hamilton_mul(Quaternion::unit_i(), Quaternion::unit_j()) !=
          hamilton_mul(Quaternion::unit_j(), Quaternion::unit_i()));
}

TEST_CASE("matvec, hermitian, hadamard") {
    QuatMatrix A(1, 1);
    A(0, 0) = Quaternion::unit_i();
    QuatVector x = {Quaternion::unit_j()};
    CHECK(matvec(A, x)[0] == Quaternion::unit_k());

    QuatMatrix B(1, 2);
    B(0, 0) = {1, 1, 0, 0};
    B(0, 1) = Quaternion::unit_j();
    QuatMatrix H = hermitian(B);
    CHECK(H.rows() == 2);
    CHECK(H.cols() == 1);
    CHECK(H(0, 0) == Quaternion{1, -1, 0, 0});
    CHECK(H(1, 0) == -Quaternion::unit_j());

    QuatVector a = {Quaternion::unit_i(), Quaternion::unit_j()};
    QuatVector b = {Quaternion::unit_j(), Quaternion::unit_j()};
    QuatVector had = hadamard(a, b);
    CHECK(had[0] == Quaternion::unit_k());
    CHECK(had[1] == Quaternion{-1, 0, 0, 0});

    QuatMatrix C(2, 3);
    CHECK_THROWS_AS(matvec(C, x), Error);
    try {
        matvec(C, x);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::dimension_mismatch);
        CHECK(std::string(e.what()).find("2x3") != std::string::npos);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("componentwise_mul multiplies matching parts") {
    QuatVector x = {{1, 2, 3, 4}};
    QuatVector y = {{2, -1, 0.5, 2}};
    QuatVector out = componentwise_mul(x, y);
    CHECK(out[0] == Quaternion{2, -2, 1.5, 8});
}
