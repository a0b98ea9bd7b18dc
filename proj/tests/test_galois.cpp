#include <catch2/catch_amalgamated.hpp>

#include "ramlab/galois.hpp"

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

}  // namespace

TEST_CASE("quadratic ramified extension from the uniformizer") {
    auto F = q2();
    auto N = build_extension(F, {{LayerKind::kummer, F.uniformizer()}});
    REQUIRE(N.degree() == 2);
    const auto x = N.generator(0);
    REQUIRE(N.n_valuation(x) == 1);
    REQUIRE(N.n_valuation(N.uniformizer()) == 1);
    REQUIRE(N.n_valuation(N.embed_ground(F.uniformizer())) == 2);
    REQUIRE(N.trace_to_ground(x).is_zero_to_precision());
    REQUIRE(N.trace_to_ground(N.one()).valuation() == 1);
    const auto sx = N.apply_galois(GaloisVector{1}, x);
    REQUIRE((sx + x).is_zero_to_precision());
}

TEST_CASE("quadratic extension with unit datum") {
    auto F = q2();
    auto N = build_extension(F, {{LayerKind::kummer, F.from_int(-1)}});
    const auto x = N.generator(0);
    REQUIRE(N.n_valuation(x) == 0);
    REQUIRE(N.n_valuation(N.uniformizer()) == 1);

    const auto y = N.one() + x;
    REQUIRE(N.n_valuation(y) == 1);
    REQUIRE(N.norm_to_ground(y).valuation() == 1);
    REQUIRE(N.trace_to_ground(y).valuation() == 1);
    REQUIRE((N.inverse(y) * y - N.one()).is_zero_to_precision());
    REQUIRE(N.leading_residue(x, 0) == 1);

    // squaring the generator gives -1 back
    const auto sq = x * x + N.one();
    REQUIRE(sq.is_zero_to_precision());
}

TEST_CASE("rank-2 extension, fixed fields and trace transitivity") {
    auto F = q2();
    std::vector<ExtensionLayerSpec> layers{
        {LayerKind::kummer, F.from_int(-1)},
        {LayerKind::kummer, F.from_int(2)},
    };
    const auto rep = validate_extension(F, layers);
    REQUIRE(rep.ok);
    REQUIRE(rep.lines.size() == 3);
    for (const auto& l : rep.lines) REQUIRE(l.cls == DatumClass::ramified);

    auto N = build_extension(F, layers);
    REQUIRE(N.degree() == 4);
    REQUIRE(N.n_valuation(N.uniformizer()) == 1);
    REQUIRE(N.n_valuation(N.embed_ground(F.uniformizer())) == 4);

    const Subgroup H = Subgroup::from_generators(2, 2, {GaloisVector{0, 1}});
    const auto L = fixed_field(N, H);
    REQUIRE(L.field().degree() == 2);

    const auto yl = L.field().generator(0) + L.field().embed_ground(F.from_int(3));
    const auto em = L.embed(yl);
    const auto back = L.section(em);
    REQUIRE(back.has_value());
    REQUIRE((*back - yl).is_zero_to_precision());
    for (const auto& h : H.elements())
        REQUIRE((N.apply_galois(h, em) - em).is_zero_to_precision());

    const auto z = N.generator(0) * N.generator(1) + N.uniformizer();
    const auto trNL = N.trace_to(H, z);
    const auto sec = L.section(trNL);
    REQUIRE(sec.has_value());
    const auto trLK = L.field().trace_to_ground(*sec);
    REQUIRE((trLK - N.trace_to_ground(z)).is_zero_to_precision());
}

TEST_CASE("restriction of the group action to a fixed field") {
    auto F = f2t();
    auto N = build_extension(
        F, {{LayerKind::artin_schreier, F.from_digits(DigitString::parse("1@-1"))},
            {LayerKind::artin_schreier, F.from_digits(DigitString::parse("1@-3"))}});
    for (const auto& gen :
         {GaloisVector{1, 0}, GaloisVector{0, 1}, GaloisVector{1, 1}}) {
        const Subgroup H = Subgroup::from_generators(2, 2, {gen});
        const auto L = fixed_field(N, H);
        for (const auto& g : N.full_group().elements()) {
            const auto h = L.induced_action(g);
            // restriction commutes with the embedding on a generic element
            const auto yl =
                L.field().generator(0) + L.field().uniformizer() +
                L.field().embed_ground(F.uniformizer());
            const auto lhs = N.apply_galois(g, L.embed(yl));
            const auto rhs = L.embed(L.field().apply_galois(h, yl));
            REQUIRE((lhs - rhs).is_zero_to_precision());
        }
        // elements of H restrict to the identity
        for (const auto& g : H.elements())
            for (i64 c : L.induced_action(g)) REQUIRE(c == 0);
    }
}

TEST_CASE("invalid extension data is rejected") {
    auto F = q2();
    // 4 = 2^2 is a square times a unit square: the line collapses
    REQUIRE_THROWS_AS(build_extension(F, {{LayerKind::kummer, F.from_int(4)}}),
                      InputError);
    // 5 = 1 mod 4 is a square in the 2-adics
    REQUIRE_THROWS_AS(build_extension(F, {{LayerKind::kummer, F.from_int(5)}}),
                      InputError);
    // 2 and 8 differ by a square: dependent pair
    REQUIRE_THROWS_AS(build_extension(F, {{LayerKind::kummer, F.from_int(2)},
                                          {LayerKind::kummer, F.from_int(8)}}),
                      InputError);
    // Kummer layer needs the p-th root of unity in the ground field
    GroundFieldSpec q3s;
    q3s.p = 3;
    auto Q3 = make_ground_field(q3s);
    REQUIRE_THROWS_AS(build_extension(Q3, {{LayerKind::kummer, Q3.from_int(3)}}),
                      InputError);
    // zero datum
    REQUIRE_THROWS_AS(build_extension(F, {{LayerKind::kummer, F.zero()}}),
                      InputError);
}

TEST_CASE("degree-p Artin-Schreier layer in characteristic p") {
    auto F = f2t();
    const auto f = F.from_digits(DigitString::parse("1@-1"));
    auto N = build_extension(F, {{LayerKind::artin_schreier, f}});
    const auto x = N.generator(0);
    REQUIRE(N.n_valuation(x) == -1);
    REQUIRE(N.n_valuation(N.uniformizer()) == 1);

    const auto sx = N.apply_galois(GaloisVector{1}, x);
    REQUIRE(((sx - x) - N.one()).is_zero_to_precision());
    REQUIRE((N.apply_galois(GaloisVector{1}, sx) - x).is_zero_to_precision());
    REQUIRE((x * x + x - N.embed_ground(f)).is_zero_to_precision());
}

TEST_CASE("Artin-Schreier data outside the ramified range is rejected") {
    auto F = f2t();
    // positive valuation: the class splits
    REQUIRE_THROWS_AS(
        build_extension(F, {{LayerKind::artin_schreier, F.uniformizer()}}),
        InputError);
    // unit: cuts out the unramified extension
    REQUIRE_THROWS_AS(build_extension(F, {{LayerKind::artin_schreier, F.one()}}),
                      InputError);
}

TEST_CASE("rank-2 Artin-Schreier extension basics") {
    auto F = f2t();
    auto N = build_extension(
        F, {{LayerKind::artin_schreier, F.from_digits(DigitString::parse("1@-1"))},
            {LayerKind::artin_schreier, F.from_digits(DigitString::parse("1@-3"))}});
    REQUIRE(N.degree() == 4);
    REQUIRE(N.n_valuation(N.generator(0)) == -2);
    REQUIRE(N.n_valuation(N.generator(1)) == -6);
    REQUIRE(N.n_valuation(N.uniformizer()) == 1);

    SplitMix64 rng(7);
    REQUIRE(N.n_valuation(N.random_with_valuation(-3, rng)) == -3);
}

TEST_CASE("subgroup lattice bookkeeping") {
    Subgroup H = Subgroup::from_generators(2, 2, {GaloisVector{1, 1}});
    REQUIRE(H.rank() == 1);
    REQUIRE(H.order() == 2);
    REQUIRE(H.contains(GaloisVector{1, 1}));
    REQUIRE_FALSE(H.contains(GaloisVector{1, 0}));
    REQUIRE(H.elements().size() == 2);

    const auto ann = H.annihilator_basis();
    REQUIRE(ann.size() == 1);
    // the annihilator line pairs to zero with the generator
    i64 acc = 0;
    for (std::size_t i = 0; i < 2; ++i) acc += ann[0][i];
    REQUIRE(acc % 2 == 0);

    Subgroup full = Subgroup::from_generators(3, 2, {GaloisVector{1, 0},
                                                     GaloisVector{0, 1}});
    REQUIRE(full.order() == 9);
    REQUIRE(full.elements().size() == 9);

    REQUIRE(Subgroup::mod_inv(2, 5) == 3);
    REQUIRE(Subgroup::mod_inv(4, 7) == 2);
}

TEST_CASE("norm and trace against direct conjugate products") {
    auto F = q2();
    auto N = build_extension(F, {{LayerKind::kummer, F.from_int(-1)}});
    SplitMix64 rng(31);
    for (int i = 0; i < 5; ++i) {
        const auto y = N.random_with_valuation(i - 2, rng);
        NElement prod = N.one();
        NElement sum = N.zero();
        for (const auto& s : N.full_group().elements()) {
            prod = prod * N.apply_galois(s, y);
            sum = sum + N.apply_galois(s, y);
        }
        const auto nm = N.as_ground(prod);
        const auto tr = N.as_ground(sum);
        REQUIRE(nm.has_value());
        REQUIRE(tr.has_value());
        REQUIRE((N.norm_to_ground(y) - *nm).is_zero_to_precision());
        REQUIRE((N.trace_to_ground(y) - *tr).is_zero_to_precision());
    }
}
