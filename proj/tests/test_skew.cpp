#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "skewdh/skew.hpp"

using namespace skewdh;

namespace {

FieldParamsPtr f4() { return make_field(2, 2, {1, 1, 1}); }
FieldParamsPtr f5() { return make_field(5, 1, {0, 1}); }

FieldElement el(const FieldParamsPtr& p, uint64_t index) {
    return FieldElement::from_index(p, index);
}

Twist twist_of(const FieldParamsPtr& p, uint32_t s, uint64_t beta_index) {
    return make_twist(p, s, el(p, beta_index));
}

// Independent route for phi: with gamma = c^(p^s - 1),
// phi(c, b) = gamma*(b + beta) - beta. Derived once by hand from the inner
// form of delta; used as an oracle against the direct formula.
FieldElement phi_oracle(const Twist& tw, const FieldElement& c, const FieldElement& b) {
    FieldElement gamma = mul(frobenius(c, tw.frobenius_exp), inv(c));
    return sub(mul(gamma, add(b, tw.beta)), tw.beta);
}

std::vector<FieldParamsPtr> small_fields() {
    return {f4(), f5(), make_field(2, 3, find_irreducible(2, 3)),
            make_field(3, 2, find_irreducible(3, 2)),
            make_field(2, 4, find_irreducible(2, 4))};
}

PointFunction random_fn(const FieldParamsPtr& p, Rng& rng) {
    return PointFunction::tabulate(p, [&](const FieldElement&) { return random_element(p, rng); });
}

PointFunction random_nowhere_zero_fn(const FieldParamsPtr& p, Rng& rng) {
    return PointFunction::tabulate(p, [&](const FieldElement&) { return random_nonzero(p, rng); });
}

}  // namespace

TEST_CASE("delta is the inner sigma-derivation") {
    auto p4 = f4();
    auto tw = twist_of(p4, 1, 1);
    CHECK(delta(tw, el(p4, 2)) == FieldElement::one(p4));  // t^2 + t = 1

    for (auto params : small_fields()) {
        for (uint32_t s = 0; s < params->m; ++s) {
            for (uint64_t bi : {uint64_t(0), uint64_t(1), params->order - 1}) {
                auto t = twist_of(params, s, bi);
                CHECK(delta(t, FieldElement::one(params)).is_zero());
                if (bi == 0)
                    for (const auto& x : enumerate_field(params)) CHECK(delta(t, x).is_zero());
                // derivation law, exhaustive
                for (const auto& x : enumerate_field(params))
                    for (const auto& y : enumerate_field(params))
                        CHECK(delta(t, mul(x, y)) ==
                              add(mul(sigma(t, x), delta(t, y)), mul(delta(t, x), y)));
            }
        }
    }
}

TEST_CASE("phi matches hand values and the closed-form oracle") {
    auto p4 = f4();
    const auto t = el(p4, 2), t1 = el(p4, 3);
    auto tw0 = twist_of(p4, 1, 0);
    auto tw1 = twist_of(p4, 1, 1);

    for (const auto& b : enumerate_field(p4)) {
        CHECK(phi(tw0, FieldElement::one(p4), b) == b);
        CHECK(phi(tw1, FieldElement::one(p4), b) == b);
    }
    CHECK(phi(tw0, t, t) == t1);
    CHECK(phi(tw1, t, FieldElement::zero(p4)) == t1);
    CHECK_THROWS_MATCHES(phi(tw0, FieldElement::zero(p4), t), error,
                         Catch::Matchers::Predicate<error>(
                             [](const error& e) { return e.code() == errc::zero_actor; }));

    for (auto params : small_fields()) {
        for (uint32_t s = 0; s < params->m; ++s) {
            for (uint64_t bi : {uint64_t(0), uint64_t(1), params->order - 1}) {
                auto tw = twist_of(params, s, bi);
                for (const auto& c : enumerate_field(params)) {
                    if (c.is_zero()) continue;
                    for (const auto& b : enumerate_field(params))
                        CHECK(phi(tw, c, b) == phi_oracle(tw, c, b));
                }
            }
        }
    }
}

TEST_CASE("phi is a left action of K*") {
    for (auto params : small_fields()) {
        for (uint32_t s = 0; s < params->m; ++s) {
            auto tw = twist_of(params, s, 1 % params->order);
            auto elems = enumerate_field(params);
            for (const auto& a : elems) {
                if (a.is_zero()) continue;
                for (const auto& c : elems) {
                    if (c.is_zero()) continue;
                    for (const auto& b : elems)
                        CHECK(phi(tw, a, phi(tw, c, b)) == phi(tw, mul(a, c), b));
                }
            }
        }
    }

    Rng rng(0xac7104);
    auto big = make_field(2, 8, find_irreducible(2, 8));
    auto tw = make_twist(big, 3, random_element(big, rng));
    for (int i = 0; i < 10000; ++i) {
        auto a = random_nonzero(big, rng);
        auto c = random_nonzero(big, rng);
        auto b = random_element(big, rng);
        CHECK(phi(tw, a, phi(tw, c, b)) == phi(tw, mul(a, c), b));
    }
}

TEST_CASE("conjugacy classes of F_4") {
    auto p4 = f4();
    const auto t = el(p4, 2), t1 = el(p4, 3);

    auto orbit0 = conjugacy_class(twist_of(p4, 1, 0), FieldElement::one(p4));
    REQUIRE(orbit0.size() == 3);
    CHECK(orbit0.points == std::vector<FieldElement>{FieldElement::one(p4), t, t1});
    CHECK(orbit0.position_of(t1) == 2);

    auto orbit1 = conjugacy_class(twist_of(p4, 1, 1), FieldElement::one(p4));
    REQUIRE(orbit1.size() == 1);
    CHECK(orbit1.points[0] == FieldElement::one(p4));

    auto orbit_zero = conjugacy_class(twist_of(p4, 1, 1), FieldElement::zero(p4));
    REQUIRE(orbit_zero.size() == 3);
    CHECK(orbit_zero.points == std::vector<FieldElement>{FieldElement::zero(p4), t, t1});

    CHECK_THROWS_MATCHES(orbit1.position_of(t), error, Catch::Matchers::Predicate<error>(
        [](const error& e) { return e.code() == errc::not_in_orbit; }));
}

TEST_CASE("orbits partition the field and obey the size law") {
    for (auto params : {f4(), f5(), make_field(2, 3, find_irreducible(2, 3)),
                        make_field(3, 2, find_irreducible(3, 2)),
                        make_field(2, 4, find_irreducible(2, 4)),
                        make_field(2, 5, find_irreducible(2, 5)),
                        make_field(2, 6, find_irreducible(2, 6)),
                        make_field(3, 3, find_irreducible(3, 3)),
                        make_field(5, 2, find_irreducible(5, 2)),
                        make_field(7, 2, find_irreducible(7, 2)),
                        make_field(61, 1, {0, 1})}) {
        Rng rng(params->order);
        for (uint32_t s = 0; s < params->m; ++s) {
            for (const auto& beta :
                 {FieldElement::zero(params), FieldElement::one(params), random_element(params, rng)}) {
                auto tw = make_twist(params, s, beta);
                uint64_t ps = 1;
                for (uint32_t i = 0; i < s; ++i) ps *= params->p;
                uint64_t expected = (params->order - 1) / std::gcd(ps - 1, params->order - 1);

                uint64_t covered = 0;
                std::vector<bool> seen(size_t(params->order), false);
                for (const auto& b : enumerate_field(params)) {
                    auto orbit = conjugacy_class(tw, b);
                    if (b == neg(beta)) {
                        CHECK(orbit.size() == 1);
                    } else {
                        CHECK(orbit.size() == expected);
                    }
                    if (!seen[b.index()]) {  // new class: count it once, check disjointness
                        for (const auto& x : orbit.points) {
                            CHECK(!seen[x.index()]);
                            seen[x.index()] = true;
                            ++covered;
                        }
                    } else {
                        for (const auto& x : orbit.points) CHECK(seen[x.index()]);
                    }
                }
                CHECK(covered == params->order);
            }
        }
    }
}

TEST_CASE("skew product basics") {
    auto p4 = f4();
    auto tw = twist_of(p4, 1, 0);
    const auto t = el(p4, 2), t1 = el(p4, 3);
    Rng rng(0x515);

    auto zero_fn = PointFunction::constant(p4, FieldElement::zero(p4));
    auto one_fn = PointFunction::constant(p4, FieldElement::one(p4));
    auto f = random_fn(p4, rng);

    CHECK(skew_product(tw, f, zero_fn) == zero_fn);
    CHECK(skew_product(tw, f, one_fn) == f);
    CHECK(skew_product(tw, one_fn, f) == f);
    CHECK(skew_product(tw, PointFunction::constant(p4, t), PointFunction::constant(p4, t)) ==
          PointFunction::constant(p4, t1));
}

TEST_CASE("pointwise addition") {
    auto p4 = f4();
    auto p5 = f5();
    Rng rng(0xadd);
    auto f = random_fn(p4, rng);
    CHECK(pointwise_add(f, PointFunction::constant(p4, FieldElement::zero(p4))) == f);
    CHECK(pointwise_add(f, f) == PointFunction::constant(p4, FieldElement::zero(p4)));
    CHECK(pointwise_add(PointFunction::constant(p5, el(p5, 2)),
                        PointFunction::constant(p5, el(p5, 4))) ==
          PointFunction::constant(p5, el(p5, 1)));
}

TEST_CASE("near-ring laws of the skew product") {
    for (auto params : {f4(), make_field(2, 3, find_irreducible(2, 3))}) {
        Rng rng(params->order * 7919);
        auto tw = make_twist(params, 1, FieldElement::one(params));
        auto one_fn = PointFunction::constant(params, FieldElement::one(params));
        for (int i = 0; i < 500; ++i) {
            auto f = random_fn(params, rng);
            auto g = random_fn(params, rng);
            auto h = random_fn(params, rng);
            CHECK(skew_product(tw, f, one_fn) == f);
            CHECK(skew_product(tw, one_fn, f) == f);
            CHECK(skew_product(tw, pointwise_add(f, g), h) ==
                  pointwise_add(skew_product(tw, f, h), skew_product(tw, g, h)));
            CHECK(skew_product(tw, skew_product(tw, f, g), h) ==
                  skew_product(tw, f, skew_product(tw, g, h)));
        }
    }
}

TEST_CASE("psi acts on the left") {
    auto p4 = f4();
    auto tw = twist_of(p4, 1, 0);
    const auto one = FieldElement::one(p4);
    const auto t = el(p4, 2), t1 = el(p4, 3);

    for (const auto& b : enumerate_field(p4))
        CHECK(psi(tw, PointFunction::constant(p4, one), b) == b);
    auto const_t = PointFunction::constant(p4, t);
    CHECK(psi(tw, const_t, one) == t);
    CHECK(psi(tw, skew_product(tw, const_t, const_t), one) == t1);
    CHECK(psi(tw, const_t, psi(tw, const_t, one)) == t1);

    CHECK_THROWS_MATCHES(psi(tw, PointFunction::constant(p4, FieldElement::zero(p4)), one), error,
                         Catch::Matchers::Predicate<error>(
                             [](const error& e) { return e.code() == errc::zero_value; }));

    // exhaustive over nowhere-zero tabulated pairs at q = 4
    std::vector<PointFunction> nz;
    auto elems = enumerate_field(p4);
    for (uint64_t mask = 0; mask < 81; ++mask) {
        uint64_t v = mask;
        std::vector<FieldElement> table;
        for (int i = 0; i < 4; ++i) {
            table.push_back(elems[1 + v % 3]);
            v /= 3;
        }
        nz.push_back(PointFunction::from_table(p4, std::move(table)));
    }
    for (const auto& f : nz)
        for (const auto& g : nz)
            for (const auto& b : elems)
                CHECK(psi(tw, skew_product(tw, f, g), b) == psi(tw, f, psi(tw, g, b)));

    // sampled at q = 16
    auto p16 = make_field(2, 4, find_irreducible(2, 4));
    auto tw16 = make_twist(p16, 1, FieldElement::one(p16));
    Rng rng(0x951);
    for (int i = 0; i < 2000; ++i) {
        auto f = random_nowhere_zero_fn(p16, rng);
        auto g = random_nowhere_zero_fn(p16, rng);
        auto b = random_element(p16, rng);
        CHECK(psi(tw16, skew_product(tw16, f, g), b) == psi(tw16, f, psi(tw16, g, b)));
    }
}

TEST_CASE("skew polynomial multiplication") {
    auto p4 = f4();
    const auto t = el(p4, 2), t1 = el(p4, 3);
    const auto zero = FieldElement::zero(p4);
    const auto one = FieldElement::one(p4);

    auto tw0 = twist_of(p4, 1, 0);
    auto tw1 = twist_of(p4, 1, 1);
    SkewPolynomial X{{zero, one}};
    SkewPolynomial const_t{{t}};

    CHECK(skew_poly_mul(tw0, X, const_t) == SkewPolynomial{{zero, t1}});       // (t+1)X
    CHECK(skew_poly_mul(tw1, X, const_t) == SkewPolynomial{{one, t1}});        // (t+1)X + 1

    Rng rng(0x90e);
    auto random_poly = [&](int maxdeg) {
        std::vector<FieldElement> cs;
        int d = int(rng.below(uint64_t(maxdeg + 1)));
        for (int i = 0; i <= d; ++i) cs.push_back(random_element(p4, rng));
        return normalize(std::move(cs));
    };
    SkewPolynomial one_poly{{one}};
    for (int i = 0; i < 300; ++i) {
        auto f = random_poly(3), g = random_poly(3), h = random_poly(3);
        for (const auto& tw : {tw0, tw1}) {
            CHECK(skew_poly_mul(tw, f, one_poly) == f);
            CHECK(skew_poly_mul(tw, one_poly, f) == f);
            CHECK(skew_poly_mul(tw, skew_poly_mul(tw, f, g), h) ==
                  skew_poly_mul(tw, f, skew_poly_mul(tw, g, h)));
            CHECK(skew_poly_mul(tw, f, skew_poly_add(g, h)) ==
                  skew_poly_add(skew_poly_mul(tw, f, g), skew_poly_mul(tw, f, h)));
            CHECK(skew_poly_mul(tw, skew_poly_add(f, g), h) ==
                  skew_poly_add(skew_poly_mul(tw, f, h), skew_poly_mul(tw, g, h)));
        }
    }
}

TEST_CASE("skew norms and evaluation") {
    auto p4 = f4();
    const auto t = el(p4, 2);
    auto tw0 = twist_of(p4, 1, 0);

    for (const auto& b : enumerate_field(p4))
        CHECK(skew_norm(tw0, 0, b) == FieldElement::one(p4));
    CHECK(skew_norm(tw0, 2, t) == FieldElement::one(p4));  // N_2(b) = b^3

    // trivial twist degenerates to ordinary evaluation
    auto p5 = f5();
    auto trivial = twist_of(p5, 0, 0);
    Rng rng(0xe7a1);
    for (int i = 0; i < 200; ++i) {
        std::vector<FieldElement> cs;
        for (int k = 0; k <= 3; ++k) cs.push_back(random_element(p5, rng));
        auto poly = normalize(cs);
        auto b = random_element(p5, rng);
        FieldElement expect = FieldElement::zero(p5);
        for (size_t k = 0; k < poly.coeffs.size(); ++k)
            expect = add(expect, mul(poly.coeffs[k], pow(b, k)));
        CHECK(skew_eval(trivial, poly, b) == expect);
    }
    CHECK(skew_eval(trivial, SkewPolynomial{}, el(p5, 3)).is_zero());
}

TEST_CASE("poly_to_fn bridges ring elements and functions") {
    auto p4 = f4();
    const auto t = el(p4, 2);
    const auto zero = FieldElement::zero(p4);
    const auto one = FieldElement::one(p4);
    auto tw0 = twist_of(p4, 1, 0);

    CHECK(poly_to_fn(tw0, SkewPolynomial{{t}}) == PointFunction::constant(p4, t));
    auto ident = poly_to_fn(tw0, SkewPolynomial{{zero, one}});
    for (const auto& x : enumerate_field(p4)) CHECK(ident(x) == x);
    auto sq = poly_to_fn(tw0, SkewPolynomial{{zero, zero, one}});
    for (const auto& x : enumerate_field(p4)) CHECK(sq(x) == pow(x, 3));

    // evaluation/product compatibility, exhaustive over degree <= 2 at q = 4
    for (const auto& tw : {tw0, twist_of(p4, 1, 1)}) {
        std::vector<SkewPolynomial> polys;
        for (uint64_t i = 0; i < 64; ++i) {
            std::vector<FieldElement> cs{el(p4, i % 4), el(p4, (i / 4) % 4), el(p4, i / 16)};
            polys.push_back(normalize(std::move(cs)));
        }
        for (const auto& f : polys)
            for (const auto& g : polys)
                CHECK(poly_to_fn(tw, skew_poly_mul(tw, f, g)) ==
                      skew_product(tw, poly_to_fn(tw, f), poly_to_fn(tw, g)));
    }

    // random degree <= 4 at q = 16
    auto p16 = make_field(2, 4, find_irreducible(2, 4));
    auto tw16 = make_twist(p16, 2, el(p16, 7));
    Rng rng(0xb41d9e);
    for (int i = 0; i < 200; ++i) {
        std::vector<FieldElement> fc, gc;
        for (int k = 0; k <= int(rng.below(5)); ++k) fc.push_back(random_element(p16, rng));
        for (int k = 0; k <= int(rng.below(5)); ++k) gc.push_back(random_element(p16, rng));
        auto f = normalize(std::move(fc));
        auto g = normalize(std::move(gc));
        CHECK(poly_to_fn(tw16, skew_poly_mul(tw16, f, g)) ==
              skew_product(tw16, poly_to_fn(tw16, f), poly_to_fn(tw16, g)));
    }
}

TEST_CASE("left distributivity fails and the witness is reproducible") {
    auto p4 = f4();
    auto tw = twist_of(p4, 1, 0);
    const auto t = el(p4, 2);
    const auto one = FieldElement::one(p4);
    const auto zero = FieldElement::zero(p4);

    // hand witness: f(0)=0, f(1)=1, f(t)=1, f(t+1)=0; g = 1, h = t, x = 1
    auto f = PointFunction::from_table(p4, {zero, one, one, zero});
    auto g = PointFunction::constant(p4, one);
    auto h = PointFunction::constant(p4, t);
    auto lhs = skew_product(tw, f, pointwise_add(g, h));
    auto rhs = pointwise_add(skew_product(tw, f, g), skew_product(tw, f, h));
    CHECK(lhs(one) == zero);
    CHECK(rhs(one) == el(p4, 3));
    CHECK(lhs(one) != rhs(one));

    Rng rng(0x1e57);
    auto witness = find_left_distrib_counterexample(tw, 1000, rng);
    REQUIRE(witness.has_value());
    auto wl = skew_product(tw, witness->f, pointwise_add(witness->g, witness->h));
    auto wr = pointwise_add(skew_product(tw, witness->f, witness->g),
                            skew_product(tw, witness->f, witness->h));
    CHECK(wl(witness->x) != wr(witness->x));

    // f = 0 is never a witness
    auto zf = PointFunction::constant(p4, zero);
    for (int i = 0; i < 50; ++i) {
        auto rg = random_fn(p4, rng);
        auto rh = random_fn(p4, rng);
        CHECK(skew_product(tw, zf, pointwise_add(rg, rh)) ==
              pointwise_add(skew_product(tw, zf, rg), skew_product(tw, zf, rh)));
    }

    // trivial twist: the product is pointwise multiplication; report the outcome
    auto p5 = f5();
    auto trivial = twist_of(p5, 0, 0);
    auto w5 = find_left_distrib_counterexample(trivial, 1000, rng);
    INFO("trivial-twist search outcome: " << (w5 ? "witness found" : "no witness"));
    CHECK(true);
}
