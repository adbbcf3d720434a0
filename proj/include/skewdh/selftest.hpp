#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "skewdh/pke.hpp"
#include "skewdh/tset.hpp"

namespace skewdh {

struct SuiteResult {
    std::string name;
    uint64_t checks = 0;
    uint64_t failures = 0;
};

namespace detail {

struct SelftestContext {
    std::vector<SuiteResult> suites;
    SuiteResult* current = nullptr;

    void begin(const std::string& name) {
        suites.push_back(SuiteResult{name, 0, 0});
        current = &suites.back();
    }
    void expect(bool ok) {
        ++current->checks;
        if (!ok) ++current->failures;
    }
};

}  // namespace detail

// Exhaustive invariant suite over the desk-scale fields q = 4, 5, 8, 9.
// mutate_delta swaps in a broken derivation (beta * sigma(x) instead of
// beta * (sigma(x) - x)) as a negative control: the derivation-law suite must
// then report failures.
inline bool run_selftest(std::ostream& out, bool mutate_delta = false) {
    detail::SelftestContext ctx;

    std::vector<FieldParamsPtr> fields = {
        make_field(2, 2, find_irreducible(2, 2)), make_field(5, 1, {0, 1}),
        make_field(2, 3, find_irreducible(2, 3)), make_field(3, 2, find_irreducible(3, 2))};

    auto twists_of = [](const FieldParamsPtr& p) {
        std::vector<Twist> out;
        for (uint32_t s = 0; s < p->m; ++s)
            for (uint64_t b : {uint64_t(0), uint64_t(1)})
                out.push_back(make_twist(p, s, FieldElement::from_index(p, b)));
        return out;
    };

    auto delta_fn = [mutate_delta](const Twist& tw, const FieldElement& x) {
        if (mutate_delta) return mul(tw.beta, sigma(tw, x));  // broken on purpose
        return delta(tw, x);
    };

    ctx.begin("field-axioms");
    for (const auto& p : fields) {
        auto elems = enumerate_field(p);
        for (const auto& a : elems)
            for (const auto& b : elems)
                for (const auto& c : elems) {
                    ctx.expect(add(a, b) == add(b, a));
                    ctx.expect(mul(a, b) == mul(b, a));
                    ctx.expect(add(add(a, b), c) == add(a, add(b, c)));
                    ctx.expect(mul(mul(a, b), c) == mul(a, mul(b, c)));
                    ctx.expect(mul(a, add(b, c)) == add(mul(a, b), mul(a, c)));
                }
        for (const auto& a : elems) {
            ctx.expect(add(a, neg(a)).is_zero());
            if (!a.is_zero()) ctx.expect(mul(a, inv(a)) == FieldElement::one(p));
        }
    }

    ctx.begin("frobenius-homomorphism");
    for (const auto& p : fields) {
        auto elems = enumerate_field(p);
        for (uint32_t s = 0; s < p->m; ++s)
            for (const auto& a : elems)
                for (const auto& b : elems) {
                    ctx.expect(frobenius(add(a, b), s) == add(frobenius(a, s), frobenius(b, s)));
                    ctx.expect(frobenius(mul(a, b), s) == mul(frobenius(a, s), frobenius(b, s)));
                }
    }

    ctx.begin("fermat");
    for (const auto& p : fields)
        for (const auto& a : enumerate_field(p)) ctx.expect(pow(a, p->order) == a);

    ctx.begin("encode-decode");
    for (const auto& p : fields)
        for (const auto& a : enumerate_field(p)) ctx.expect(decode(p, encode(a)) == a);

    ctx.begin("derivation-law");
    for (const auto& p : fields) {
        auto elems = enumerate_field(p);
        for (const auto& tw : twists_of(p)) {
            ctx.expect(delta_fn(tw, FieldElement::one(p)).is_zero());
            for (const auto& x : elems)
                for (const auto& y : elems)
                    ctx.expect(delta_fn(tw, mul(x, y)) ==
                               add(mul(sigma(tw, x), delta_fn(tw, y)), mul(delta_fn(tw, x), y)));
        }
    }

    ctx.begin("phi-action-law");
    for (const auto& p : fields) {
        auto elems = enumerate_field(p);
        for (const auto& tw : twists_of(p))
            for (const auto& a : elems) {
                if (a.is_zero()) continue;
                for (const auto& c : elems) {
                    if (c.is_zero()) continue;
                    for (const auto& b : elems)
                        ctx.expect(phi(tw, a, phi(tw, c, b)) == phi(tw, mul(a, c), b));
                }
            }
    }

    ctx.begin("orbit-partition");
    for (const auto& p : fields) {
        for (const auto& tw : twists_of(p)) {
            std::vector<bool> seen(size_t(p->order), false);
            uint64_t covered = 0;
            for (const auto& b : enumerate_field(p)) {
                auto orbit = conjugacy_class(tw, b);
                if (!seen[b.index()]) {
                    for (const auto& x : orbit.points) {
                        ctx.expect(!seen[x.index()]);
                        seen[x.index()] = true;
                        ++covered;
                    }
                } else {
                    for (const auto& x : orbit.points) ctx.expect(seen[x.index()]);
                }
            }
            ctx.expect(covered == p->order);
        }
    }

    ctx.begin("psi-action-law");
    for (const auto& p : fields) {
        Rng rng(p->order * 17);
        for (const auto& tw : twists_of(p)) {
            for (int i = 0; i < 100; ++i) {
                auto f = PointFunction::tabulate(p, [&](const FieldElement&) {
                    return random_nonzero(p, rng);
                });
                auto g = PointFunction::tabulate(p, [&](const FieldElement&) {
                    return random_nonzero(p, rng);
                });
                for (const auto& b : enumerate_field(p))
                    ctx.expect(psi(tw, skew_product(tw, f, g), b) == psi(tw, f, psi(tw, g, b)));
            }
        }
    }

    ctx.begin("near-ring-laws");
    for (const auto& p : fields) {
        Rng rng(p->order * 23);
        auto one_fn = PointFunction::constant(p, FieldElement::one(p));
        for (const auto& tw : twists_of(p)) {
            for (int i = 0; i < 125; ++i) {
                auto rf = [&] {
                    return PointFunction::tabulate(
                        p, [&](const FieldElement&) { return random_element(p, rng); });
                };
                auto f = rf(), g = rf(), h = rf();
                ctx.expect(skew_product(tw, f, one_fn) == f);
                ctx.expect(skew_product(tw, one_fn, f) == f);
                ctx.expect(skew_product(tw, pointwise_add(f, g), h) ==
                           pointwise_add(skew_product(tw, f, h), skew_product(tw, g, h)));
                ctx.expect(skew_product(tw, skew_product(tw, f, g), h) ==
                           skew_product(tw, f, skew_product(tw, g, h)));
            }
        }
    }

    ctx.begin("eval-bridge");
    for (const auto& p : fields) {
        Rng rng(p->order * 29);
        for (const auto& tw : twists_of(p)) {
            for (int i = 0; i < 150; ++i) {
                auto rp = [&] {
                    std::vector<FieldElement> cs;
                    for (uint64_t k = 0; k <= rng.below(4); ++k)
                        cs.push_back(random_element(p, rng));
                    return normalize(std::move(cs));
                };
                auto f = rp(), g = rp();
                ctx.expect(poly_to_fn(tw, skew_poly_mul(tw, f, g)) ==
                           skew_product(tw, poly_to_fn(tw, f), poly_to_fn(tw, g)));
            }
        }
    }

    ctx.begin("w-constraints");
    for (const auto& p : fields) {
        Rng rng(p->order * 37);
        for (const auto& tw : twists_of(p)) {
            auto orbit = std::make_shared<const OrbitContext>(
                conjugacy_class(tw, FieldElement::one(p)));
            if (orbit->size() < 2) continue;
            for (int i = 0; i < 50; ++i) {
                std::vector<FieldElement> sheet, targets;
                for (uint32_t k = 0; k < pair_count(orbit->size()); ++k)
                    sheet.push_back(random_nonzero(p, rng));
                for (uint32_t k = 0; k < orbit->size(); ++k)
                    targets.push_back(random_nonzero(p, rng));
                auto part = make_w_part(*orbit, sheet, targets);
                auto e = w_sample_from(*orbit, part, SheetMode::normalized, rng);
                ctx.expect(w_membership_check(*orbit, e, part.profile));
                for (uint32_t a = 0; a < orbit->size(); ++a)
                    for (uint32_t l = a + 1; l < orbit->size(); ++l) {
                        uint32_t idx = pair_index(a, l, orbit->size());
                        ctx.expect(mul(e.values[a], e.profile.v[idx]) ==
                                   mul(e.values[l], e.profile.u[idx]));
                    }
            }
        }
    }

    ctx.begin("cross-commutation");
    for (const auto& p : fields) {
        Rng rng(p->order * 41);
        auto tw = make_twist(p, p->m > 1 ? 1 : 0, FieldElement::zero(p));
        auto orbit = std::make_shared<const OrbitContext>(conjugacy_class(tw, FieldElement::one(p)));
        if (orbit->size() < 2) continue;
        for (uint32_t n_parts : {1u, 2u}) {
            auto tp = t_params_gen(orbit, n_parts, 1, rng);
            for (int i = 0; i < 50; ++i)
                ctx.expect(cross_commutation_check(t_sample(tp, rng), t_sample(tp, rng)));
        }
    }

    ctx.begin("protocol-correctness");
    for (const auto& p : fields) {
        auto tw = make_twist(p, p->m > 1 ? 1 : 0, FieldElement::zero(p));
        auto orbit = std::make_shared<const OrbitContext>(conjugacy_class(tw, FieldElement::one(p)));
        if (orbit->size() < 2) {
            out << "protocol-correctness: q=" << p->order
                << " skipped (every orbit is a singleton)\n";
            continue;
        }
        Rng rng(p->order * 43);
        auto dp = make_domain_params(t_params_gen(orbit, 1, 1, rng));
        for (uint64_t ci = 1; ci < p->order; ++ci) {
            for (uint64_t cj = 1; cj < p->order; ++cj) {
                auto P = t_sample_fixed(dp.tparams, FieldElement::from_index(p, ci), rng);
                auto Q = t_sample_fixed(dp.tparams, FieldElement::from_index(p, cj), rng);
                auto pk_i = derive_pk(dp, P);
                auto pk_j = derive_pk(dp, Q);
                auto ki = derive_key(dp, P, pk_i, pk_j);
                auto kj = derive_key(dp, Q, pk_j, pk_i);
                ctx.expect(ki.has_value() == kj.has_value());
                if (ki && kj) ctx.expect(*ki == *kj);
            }
        }
    }

    ctx.begin("pke-roundtrip");
    for (const auto& p : fields) {
        auto tw = make_twist(p, p->m > 1 ? 1 : 0, FieldElement::zero(p));
        auto orbit = std::make_shared<const OrbitContext>(conjugacy_class(tw, FieldElement::one(p)));
        if (orbit->size() < 2) {
            out << "pke-roundtrip: q=" << p->order << " skipped (every orbit is a singleton)\n";
            continue;
        }
        Rng rng(p->order * 47);
        auto dp = make_domain_params(t_params_gen(orbit, 1, 1, rng));
        auto kp = pke_keygen(dp, rng);
        for (const auto& m : enumerate_field(p)) {
            auto ct = pke_encrypt(dp, kp.pub, m, rng);
            ctx.expect(pke_decrypt(dp, kp, ct) == m);
        }
    }

    bool all_ok = true;
    for (const auto& suite : ctx.suites) {
        out << suite.name << ": checks=" << suite.checks << " failures=" << suite.failures << "\n";
        if (suite.failures != 0) all_ok = false;
    }
    out << (all_ok ? "selftest: PASS" : "selftest: FAIL") << "\n";
    return all_ok;
}

}  // namespace skewdh
