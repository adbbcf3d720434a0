#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "skewdh/field.hpp"

namespace skewdh {

// The twist (sigma, delta): sigma = Frobenius^s and delta the inner
// sigma-derivation x -> beta*(sigma(x) - x). Over a finite field every
// sigma-derivation with sigma != id is of this form, and sigma = id forces
// delta = 0, so beta is the only knob.
struct Twist {
    FieldParamsPtr params;
    uint32_t frobenius_exp = 0;
    FieldElement beta;
};

inline Twist make_twist(FieldParamsPtr params, uint32_t s, FieldElement beta) {
    if (s >= params->m) throw std::invalid_argument("frobenius exponent must satisfy 0 <= s < m");
    detail::check_same(beta, FieldElement::zero(params));
    return Twist{std::move(params), s, std::move(beta)};
}

inline FieldElement sigma(const Twist& tw, const FieldElement& x) {
    return frobenius(x, tw.frobenius_exp);
}

inline FieldElement delta(const Twist& tw, const FieldElement& x) {
    return mul(tw.beta, sub(sigma(tw, x), x));
}

// The conjugation action phi(c, b) = sigma(c) b c^-1 + delta(c) c^-1 of K* on K.
inline FieldElement phi(const Twist& tw, const FieldElement& c, const FieldElement& b) {
    if (c.is_zero()) fail(errc::zero_actor, "phi actor must be nonzero");
    FieldElement ci = inv(c);
    return add(mul(mul(sigma(tw, c), b), ci), mul(delta(tw, c), ci));
}

// A total function F_q -> F_q as a lookup table indexed by the canonical
// integer encoding. Desk-scale only (order <= 2^20).
class PointFunction {
public:
    PointFunction() = default;

    static PointFunction constant(const FieldParamsPtr& params, const FieldElement& value) {
        return tabulate(params, [&](const FieldElement&) { return value; });
    }

    template <class Fn>
    static PointFunction tabulate(const FieldParamsPtr& params, Fn&& fn) {
        if (params->order == 0 || params->order > kEnumerationLimit)
            fail(errc::too_large, "field too large to tabulate");
        PointFunction f;
        f.params_ = params;
        f.table_.reserve(size_t(params->order));
        for (uint64_t i = 0; i < params->order; ++i)
            f.table_.push_back(fn(FieldElement::from_index(params, i)));
        return f;
    }

    static PointFunction from_table(FieldParamsPtr params, std::vector<FieldElement> table) {
        if (table.size() != params->order) fail(errc::bad_length, "table must cover all of F_q");
        PointFunction f;
        f.params_ = std::move(params);
        f.table_ = std::move(table);
        return f;
    }

    const FieldParamsPtr& field() const { return params_; }

    const FieldElement& operator()(const FieldElement& x) const { return table_[x.index()]; }

    const std::vector<FieldElement>& table() const { return table_; }

    bool nowhere_zero() const {
        return std::none_of(table_.begin(), table_.end(),
                            [](const FieldElement& v) { return v.is_zero(); });
    }

    friend bool operator==(const PointFunction& a, const PointFunction& b) {
        return a.table_ == b.table_;
    }

private:
    FieldParamsPtr params_;
    std::vector<FieldElement> table_;
};

// Left skew product: (f*g)(x) = f(phi(g(x), x)) g(x), and 0 where g vanishes.
inline PointFunction skew_product(const Twist& tw, const PointFunction& f, const PointFunction& g) {
    return PointFunction::tabulate(f.field(), [&](const FieldElement& x) {
        const FieldElement& gx = g(x);
        if (gx.is_zero()) return FieldElement::zero(f.field());
        return mul(f(phi(tw, gx, x)), gx);
    });
}

inline PointFunction pointwise_add(const PointFunction& f, const PointFunction& g) {
    return PointFunction::tabulate(f.field(), [&](const FieldElement& x) { return add(f(x), g(x)); });
}

// The semigroup action psi(f, b) = phi(f(b), b). Undefined where f(b) = 0;
// a silent zero there would corrupt protocol keys, so it is a hard error.
inline FieldElement psi(const Twist& tw, const PointFunction& f, const FieldElement& b) {
    const FieldElement& v = f(b);
    if (v.is_zero()) fail(errc::zero_value, "psi undefined: f(b) = 0");
    return phi(tw, v, b);
}

// The ordered (sigma, delta)-conjugacy class of a base point: the full
// K*-orbit of base under phi, base first, the rest ascending by canonical
// encoding.
struct OrbitContext {
    Twist twist;
    FieldElement base;
    std::vector<FieldElement> points;
    std::unordered_map<uint64_t, uint32_t> position;

    uint32_t size() const { return uint32_t(points.size()); }

    bool contains(const FieldElement& x) const {
        return position.find(x.index()) != position.end();
    }

    uint32_t position_of(const FieldElement& x) const {
        auto it = position.find(x.index());
        if (it == position.end()) fail(errc::not_in_orbit, "element outside the orbit");
        return it->second;
    }

    bool same_as(const OrbitContext& other) const {
        return *twist.params == *other.twist.params &&
               twist.frobenius_exp == other.twist.frobenius_exp && twist.beta == other.twist.beta &&
               base == other.base && points == other.points;
    }
};

inline OrbitContext conjugacy_class(const Twist& tw, const FieldElement& a) {
    OrbitContext ctx;
    ctx.twist = tw;
    ctx.base = a;

    std::vector<FieldElement> rest;
    std::unordered_map<uint64_t, uint32_t> seen;
    seen.emplace(a.index(), 0);
    for (const FieldElement& c : enumerate_field(tw.params)) {
        if (c.is_zero()) continue;
        FieldElement y = phi(tw, c, a);
        if (seen.emplace(y.index(), 0).second) rest.push_back(y);
    }
    std::sort(rest.begin(), rest.end(), index_less);

    ctx.points.push_back(a);
    ctx.points.insert(ctx.points.end(), rest.begin(), rest.end());
    for (uint32_t i = 0; i < ctx.points.size(); ++i)
        ctx.position[ctx.points[i].index()] = i;
    return ctx;
}

// Skew polynomials over the twist: coefficient list ascending, no trailing
// zeros, multiplication twisted by X c = sigma(c) X + delta(c). Used to
// validate that evaluation of products matches the skew product of the
// evaluation functions.
struct SkewPolynomial {
    std::vector<FieldElement> coeffs;

    bool is_zero() const { return coeffs.empty(); }
    int degree() const { return int(coeffs.size()) - 1; }

    friend bool operator==(const SkewPolynomial& a, const SkewPolynomial& b) {
        return a.coeffs == b.coeffs;
    }
};

inline SkewPolynomial normalize(std::vector<FieldElement> coeffs) {
    while (!coeffs.empty() && coeffs.back().is_zero()) coeffs.pop_back();
    return SkewPolynomial{std::move(coeffs)};
}

inline SkewPolynomial skew_poly_add(const SkewPolynomial& f, const SkewPolynomial& g) {
    const SkewPolynomial& lo = f.coeffs.size() <= g.coeffs.size() ? f : g;
    const SkewPolynomial& hi = f.coeffs.size() <= g.coeffs.size() ? g : f;
    std::vector<FieldElement> out = hi.coeffs;
    for (size_t i = 0; i < lo.coeffs.size(); ++i) out[i] = add(out[i], lo.coeffs[i]);
    return normalize(std::move(out));
}

namespace detail {

// X * h under the commutation rule.
inline SkewPolynomial skew_shift(const Twist& tw, const SkewPolynomial& h) {
    if (h.is_zero()) return h;
    std::vector<FieldElement> out(h.coeffs.size() + 1, FieldElement::zero(tw.params));
    for (size_t j = 0; j < h.coeffs.size(); ++j) {
        out[j + 1] = add(out[j + 1], sigma(tw, h.coeffs[j]));
        out[j] = add(out[j], delta(tw, h.coeffs[j]));
    }
    return normalize(std::move(out));
}

inline SkewPolynomial left_scale(const FieldElement& a, const SkewPolynomial& h) {
    std::vector<FieldElement> out;
    out.reserve(h.coeffs.size());
    for (const auto& c : h.coeffs) out.push_back(mul(a, c));
    return normalize(std::move(out));
}

}  // namespace detail

inline SkewPolynomial skew_poly_mul(const Twist& tw, const SkewPolynomial& f, const SkewPolynomial& g) {
    SkewPolynomial result;  // zero
    SkewPolynomial shifted = g;
    for (size_t i = 0; i < f.coeffs.size(); ++i) {
        result = skew_poly_add(result, detail::left_scale(f.coeffs[i], shifted));
        if (i + 1 < f.coeffs.size()) shifted = detail::skew_shift(tw, shifted);
    }
    return result;
}

// N_0(b) = 1, N_{k+1}(b) = sigma(N_k(b)) b + delta(N_k(b)); the evaluation
// rule compatible with the product formula of the skew product.
inline FieldElement skew_norm(const Twist& tw, uint32_t k, const FieldElement& b) {
    FieldElement n = FieldElement::one(tw.params);
    for (uint32_t i = 0; i < k; ++i) n = add(mul(sigma(tw, n), b), delta(tw, n));
    return n;
}

inline FieldElement skew_eval(const Twist& tw, const SkewPolynomial& poly, const FieldElement& b) {
    FieldElement acc = FieldElement::zero(tw.params);
    FieldElement n = FieldElement::one(tw.params);
    for (size_t k = 0; k < poly.coeffs.size(); ++k) {
        if (k > 0) n = add(mul(sigma(tw, n), b), delta(tw, n));
        acc = add(acc, mul(poly.coeffs[k], n));
    }
    return acc;
}

inline PointFunction poly_to_fn(const Twist& tw, const SkewPolynomial& poly) {
    return PointFunction::tabulate(tw.params,
                                   [&](const FieldElement& b) { return skew_eval(tw, poly, b); });
}

struct LeftDistribWitness {
    PointFunction f, g, h;
    FieldElement x;
};

// Searches for (f, g, h, x) with (f*(g+h))(x) != (f*g + f*h)(x).
//
// At a point x the two sides only depend on g(x), h(x) and the values of f at
// up to three images of x, so any witness with arbitrary functions yields one
// with constant g and h. For q <= 16 the search over (x, g(x), h(x), f at the
// relevant points) is therefore exhaustive; larger fields fall back to random
// trials within the budget.
inline std::optional<LeftDistribWitness> find_left_distrib_counterexample(const Twist& tw,
                                                                          uint64_t budget,
                                                                          Rng& rng) {
    const auto& params = tw.params;
    const std::vector<FieldElement> elems = enumerate_field(params);
    const uint64_t q = params->order;

    if (q <= 16) {
        for (const FieldElement& x : elems) {
            for (const FieldElement& gv : elems) {
                for (const FieldElement& hv : elems) {
                    FieldElement sv = add(gv, hv);
                    if (gv.is_zero() && hv.is_zero()) continue;

                    // distinct points where f matters
                    std::vector<FieldElement> pts;
                    auto push = [&](const FieldElement& p) {
                        if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
                    };
                    if (!sv.is_zero()) push(phi(tw, sv, x));
                    if (!gv.is_zero()) push(phi(tw, gv, x));
                    if (!hv.is_zero()) push(phi(tw, hv, x));

                    uint64_t combos = 1;
                    for (size_t i = 0; i < pts.size(); ++i) combos *= q;
                    for (uint64_t assign = 0; assign < combos; ++assign) {
                        uint64_t rem = assign;
                        std::vector<FieldElement> fv;
                        fv.reserve(pts.size());
                        for (size_t i = 0; i < pts.size(); ++i) {
                            fv.push_back(elems[size_t(rem % q)]);
                            rem /= q;
                        }
                        auto f_at = [&](const FieldElement& p) -> const FieldElement& {
                            for (size_t i = 0; i < pts.size(); ++i)
                                if (pts[i] == p) return fv[i];
                            return fv[0];  // unreachable
                        };
                        FieldElement lhs = sv.is_zero() ? FieldElement::zero(params)
                                                        : mul(f_at(phi(tw, sv, x)), sv);
                        FieldElement r1 = gv.is_zero() ? FieldElement::zero(params)
                                                       : mul(f_at(phi(tw, gv, x)), gv);
                        FieldElement r2 = hv.is_zero() ? FieldElement::zero(params)
                                                       : mul(f_at(phi(tw, hv, x)), hv);
                        if (lhs != add(r1, r2)) {
                            PointFunction f = PointFunction::tabulate(params, [&](const FieldElement& e) {
                                for (size_t i = 0; i < pts.size(); ++i)
                                    if (pts[i] == e) return fv[i];
                                return FieldElement::zero(params);
                            });
                            return LeftDistribWitness{std::move(f),
                                                      PointFunction::constant(params, gv),
                                                      PointFunction::constant(params, hv), x};
                        }
                    }
                }
            }
        }
        return std::nullopt;
    }

    for (uint64_t trial = 0; trial < budget; ++trial) {
        PointFunction f = PointFunction::tabulate(params, [&](const FieldElement&) {
            return random_element(params, rng);
        });
        PointFunction g = PointFunction::tabulate(params, [&](const FieldElement&) {
            return random_element(params, rng);
        });
        PointFunction h = PointFunction::tabulate(params, [&](const FieldElement&) {
            return random_element(params, rng);
        });
        PointFunction lhs = skew_product(tw, f, pointwise_add(g, h));
        PointFunction rhs = pointwise_add(skew_product(tw, f, g), skew_product(tw, f, h));
        for (const FieldElement& x : elems) {
            if (lhs(x) != rhs(x))
                return LeftDistribWitness{std::move(f), std::move(g), std::move(h), x};
        }
    }
    return std::nullopt;
}

}  // namespace skewdh
