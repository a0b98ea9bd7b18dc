#include <catch2/catch_amalgamated.hpp>

#include "ramlab/localfield.hpp"

using namespace ramlab;

namespace {

GroundField q2() {
    GroundFieldSpec s;
    s.p = 2;
    return make_ground_field(s);
}

GroundField f2t() {
    GroundFieldSpec s;
    s.characteristic = Characteristic::p;
    s.p = 2;
    return make_ground_field(s);
}

GroundField q3zeta() {
    GroundFieldSpec s;
    s.p = 3;
    s.tower = {{DigitString::parse("1@1"), DigitString::parse("1@1"),
                DigitString::parse("1@0")}};
    return make_ground_field(s);
}

}  // namespace

TEST_CASE("digit strings parse and round trip") {
    const auto d = DigitString::parse("1,0,1,1@3");
    REQUIRE(d.valuation == 3);
    REQUIRE(d.digits == std::vector<i64>{1, 0, 1, 1});
    REQUIRE(d.to_string() == "1,0,1,1@3");
    REQUIRE(DigitString::parse("-1@0").digits == std::vector<i64>{-1});
    REQUIRE_THROWS_AS(DigitString::parse(""), InputError);
    REQUIRE_THROWS_AS(DigitString::parse("1,2"), InputError);
    REQUIRE_THROWS_AS(DigitString::parse("x@0"), InputError);
    REQUIRE_THROWS_AS(DigitString::parse("1@"), InputError);
}

TEST_CASE("field spec validation") {
    GroundFieldSpec s;
    s.p = 4;
    REQUIRE_THROWS_AS(make_ground_field(s), InputError);
    s.p = 2;
    s.default_precision = 4;
    REQUIRE_THROWS_AS(make_ground_field(s), InputError);
    s.default_precision = 64;
    s.precision_cap = 32;
    REQUIRE_THROWS_AS(make_ground_field(s), InputError);
    s.precision_cap = 1024;
    REQUIRE_NOTHROW(make_ground_field(s));

    // non-Eisenstein tower level: constant term must have valuation 1
    GroundFieldSpec bad;
    bad.p = 2;
    bad.tower = {{DigitString::parse("1@0"), DigitString::parse("1@0")}};
    REQUIRE_THROWS_AS(make_ground_field(bad), InputError);
}

TEST_CASE("2-adic base arithmetic") {
    auto F = q2();
    const auto one = F.one();
    const auto two = one + one;
    REQUIRE(two.valuation() == 1);

    const auto m1 = F.from_int(-1);
    REQUIRE((m1 * m1 - one).is_zero_to_precision());

    const auto three = F.from_int(3);
    const auto r = one / three;
    REQUIRE((r * three - one).is_zero_to_precision());

    const auto a = F.from_digits(DigitString::parse("1,0,1,1@3"));
    const auto b = F.from_digits(DigitString::parse("1,1@-2"));
    REQUIRE(((a / b) * b - a).is_zero_to_precision());

    const auto pi = F.uniformizer();
    REQUIRE(pi.pow(5).valuation() == 5);
    REQUIRE(pi.pow(-3).valuation() == -3);
    REQUIRE((pi.pow(-3) * pi.pow(3) - one).is_zero_to_precision());
}

TEST_CASE("division by zero to precision is a precision failure") {
    auto F = q2();
    REQUIRE_THROWS_AS(F.one() / F.zero(), PrecisionError);
}

TEST_CASE("structural zero survives shifting and capping") {
    auto F = q2();
    const auto z = F.structural_zero();
    REQUIRE(z.is_structural_zero());
    REQUIRE(z.is_zero_to_precision());
    REQUIRE((z + F.one()).equals_to_precision(F.one()));
    REQUIRE((z * F.uniformizer()).is_structural_zero());
    REQUIRE_FALSE(z.valuation().has_value());
}

TEST_CASE("positive-characteristic Laurent series arithmetic") {
    auto F = f2t();
    const auto o = F.one();
    REQUIRE((o + o).is_zero_to_precision());
    const auto t = F.uniformizer();
    const auto u = o + t;
    // Frobenius: (1+t)^2 = 1 + t^2
    REQUIRE((u * u - (o + t * t)).is_zero_to_precision());
    REQUIRE((o / u * u - o).is_zero_to_precision());
}

TEST_CASE("Eisenstein tower over the 3-adics carries a cube root of unity") {
    auto K = q3zeta();
    REQUIRE(K.ramification_index() == 2);
    REQUIRE(K.has_zeta());
    const auto zeta = K.zeta();
    REQUIRE((zeta.pow(3) - K.one()).is_zero_to_precision());
    REQUIRE_FALSE((zeta - K.one()).is_zero_to_precision());
    REQUIRE((zeta - K.one()).valuation() == 1);
    // 3 = unit * pi^2 in this field
    REQUIRE(K.from_int(3).valuation() == 2);
}

TEST_CASE("tower without the needed root of unity reports none") {
    GroundFieldSpec s;
    s.p = 3;
    // x^2 - 3
    s.tower = {{DigitString::parse("-1@1"), DigitString::parse("0@0"),
                DigitString::parse("1@0")}};
    auto K = make_ground_field(s);
    REQUIRE(K.ramification_index() == 2);
    REQUIRE_FALSE(K.has_zeta());
    REQUIRE_THROWS_AS(K.zeta(), InputError);
}

TEST_CASE("degree-4 cyclotomic tower over the 5-adics") {
    // minimal polynomial of zeta_5 - 1: x^4 + 5x^3 + 10x^2 + 10x + 5
    GroundFieldSpec s;
    s.p = 5;
    s.tower = {{DigitString::parse("1@1"), DigitString::parse("2,1@1"),
                DigitString::parse("2,1@1"), DigitString::parse("1@1"),
                DigitString::parse("1@0")}};
    auto K = make_ground_field(s);
    REQUIRE(K.ramification_index() == 4);
    REQUIRE(K.has_zeta());
    const auto z = K.zeta();
    REQUIRE((z.pow(5) - K.one()).is_zero_to_precision());
    REQUIRE_FALSE((z - K.one()).is_zero_to_precision());

    // x^4 - 5 ramifies the same way but has no 5th root of unity
    GroundFieldSpec s2;
    s2.p = 5;
    s2.tower = {{DigitString::parse("-1@1"), DigitString::parse("0@0"),
                 DigitString::parse("0@0"), DigitString::parse("0@0"),
                 DigitString::parse("1@0")}};
    REQUIRE_FALSE(make_ground_field(s2).has_zeta());
}

TEST_CASE("seeded sampling is deterministic and valuation-exact") {
    auto K = q3zeta();
    const auto r1 = K.random_element(3, 42);
    const auto r2 = K.random_element(3, 42);
    REQUIRE(r1.equals_to_precision(r2));
    REQUIRE(r1.valuation() == 3);
    const auto r3 = K.random_element(3, 43);
    REQUIRE_FALSE(r1.equals_to_precision(r3));
    REQUIRE(K.random_element(-7, 1).valuation() == -7);
}

TEST_CASE("precision widening reruns the same arithmetic") {
    auto F = q2();
    auto W = F.with_default_precision(128);
    REQUIRE(W.default_precision() == 128);
    const auto x = W.from_digits(DigitString::parse("1,1,0,1@0"));
    REQUIRE(x.precision() >= 128);
    // same digits at the narrow precision
    const auto y = F.from_digits(DigitString::parse("1,1,0,1@0"));
    REQUIRE(y.precision() >= 64);
}

TEST_CASE("cross-instance arithmetic is rejected") {
    auto F1 = q2();
    auto F2 = q2();
    REQUIRE_THROWS_AS(F1.one() + F2.one(), InputError);
}
