#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skewdh/skew.hpp"

namespace skewdh {

inline uint32_t pair_count(uint32_t r) { return r * (r - 1) / 2; }

// Index of the unordered pair {i, j}, i < j, 0-based, in the order
// (0,1),(0,2),...,(0,r-1),(1,2),...,(r-2,r-1).
inline uint32_t pair_index(uint32_t i, uint32_t j, uint32_t r) {
    return i * r - i * (i + 1) / 2 + (j - i - 1);
}

// One pair-supported factor: generic value away from the pair, distinguished
// values at the two pair positions.
struct PairFactor {
    uint32_t i = 0, j = 0;  // 0-based orbit positions, i < j
    FieldElement generic, dist_i, dist_j;
};

// Fixed pair products (u, v), indexed like the pairs.
struct WProfile {
    std::vector<FieldElement> u, v;
};

struct WElement {
    std::vector<PairFactor> factors;    // pair order
    WProfile profile;
    std::vector<FieldElement> values;   // evaluation at each orbit point
};

// Public data of one additive part: the generic sheet (one value per pair),
// the per-row distinguished products D_i, and what they determine.
struct WPartParams {
    std::vector<FieldElement> sheet;        // generic value per pair
    std::vector<FieldElement> row_targets;  // D_i per orbit position
    WProfile profile;                       // derived
    std::vector<FieldElement> direction;    // derived value vector
};

// normalized: generic sheets are shared public parameters, only distinguished
// values and the constant factor are per-element. faithful: each element gets
// its own private generics (for the identity experiments).
enum class SheetMode { normalized, faithful };

struct TParams {
    std::shared_ptr<const OrbitContext> orbit;
    uint32_t n_parts = 0;
    uint32_t degree = 0;
    SheetMode mode = SheetMode::normalized;
    std::vector<WPartParams> parts;
    std::vector<FieldElement> direction_sum;  // sum of part directions, all entries nonzero
    std::optional<std::string> warning;
};

namespace detail {

inline FieldElement product_over(const FieldParamsPtr& params,
                                 const std::vector<FieldElement>& xs) {
    FieldElement acc = FieldElement::one(params);
    for (const auto& x : xs) acc = mul(acc, x);
    return acc;
}

}  // namespace detail

// u_il = D_i * prod_{k != i,l} sheet[{l,k}], v_il = D_l * prod_{k != i,l} sheet[{i,k}].
inline WProfile derive_profile(const OrbitContext& orbit, const std::vector<FieldElement>& sheet,
                               const std::vector<FieldElement>& row_targets) {
    const uint32_t r = orbit.size();
    const auto& params = orbit.twist.params;
    WProfile prof;
    prof.u.reserve(pair_count(r));
    prof.v.reserve(pair_count(r));
    for (uint32_t i = 0; i < r; ++i) {
        for (uint32_t l = i + 1; l < r; ++l) {
            FieldElement gu = FieldElement::one(params);
            FieldElement gv = FieldElement::one(params);
            for (uint32_t k = 0; k < r; ++k) {
                if (k == i || k == l) continue;
                gu = mul(gu, sheet[pair_index(std::min(l, k), std::max(l, k), r)]);
                gv = mul(gv, sheet[pair_index(std::min(i, k), std::max(i, k), r)]);
            }
            prof.u.push_back(mul(row_targets[i], gu));
            prof.v.push_back(mul(row_targets[l], gv));
        }
    }
    return prof;
}

// Value at a_k of any element with these row products: D_k times the generic
// values of all pairs avoiding k.
inline std::vector<FieldElement> derive_direction(const OrbitContext& orbit,
                                                  const std::vector<FieldElement>& sheet,
                                                  const std::vector<FieldElement>& row_targets) {
    const uint32_t r = orbit.size();
    const auto& params = orbit.twist.params;
    std::vector<FieldElement> dir;
    dir.reserve(r);
    for (uint32_t k = 0; k < r; ++k) {
        FieldElement g = FieldElement::one(params);
        for (uint32_t i = 0; i < r; ++i)
            for (uint32_t j = i + 1; j < r; ++j)
                if (i != k && j != k) g = mul(g, sheet[pair_index(i, j, r)]);
        dir.push_back(mul(row_targets[k], g));
    }
    return dir;
}

inline WPartParams make_w_part(const OrbitContext& orbit, std::vector<FieldElement> sheet,
                               std::vector<FieldElement> row_targets) {
    const uint32_t r = orbit.size();
    if (r < 2) fail(errc::orbit_too_small, "need at least two orbit points");
    if (sheet.size() != pair_count(r)) fail(errc::bad_length, "sheet must have one value per pair");
    if (row_targets.size() != r) fail(errc::bad_length, "one row target per orbit point");
    for (const auto& x : sheet)
        if (x.is_zero()) fail(errc::constraint_unsatisfiable, "zero generic value");
    for (const auto& x : row_targets)
        if (x.is_zero()) fail(errc::constraint_unsatisfiable, "zero row target");

    WPartParams part;
    part.profile = derive_profile(orbit, sheet, row_targets);
    part.direction = derive_direction(orbit, sheet, row_targets);
    part.sheet = std::move(sheet);
    part.row_targets = std::move(row_targets);
    return part;
}

// Assembles TParams from explicit parts; validates that the summed direction
// is nonzero everywhere and flags the char-2 constant-direction degeneracy.
inline TParams make_t_params(std::shared_ptr<const OrbitContext> orbit,
                             std::vector<WPartParams> parts, uint32_t degree,
                             SheetMode mode = SheetMode::normalized) {
    if (orbit->size() < 2) fail(errc::orbit_too_small, "need at least two orbit points");
    if (parts.empty()) throw std::invalid_argument("need at least one part");
    const auto& params = orbit->twist.params;

    TParams tp;
    tp.n_parts = uint32_t(parts.size());
    tp.degree = degree;
    tp.mode = mode;

    std::vector<FieldElement> sum(orbit->size(), FieldElement::zero(params));
    for (const auto& part : parts)
        for (uint32_t k = 0; k < orbit->size(); ++k) sum[k] = add(sum[k], part.direction[k]);
    for (const auto& x : sum)
        if (x.is_zero())
            fail(errc::zero_direction_unavoidable, "summed direction vanishes at an orbit point");

    bool constant = std::all_of(sum.begin(), sum.end(),
                                [&](const FieldElement& x) { return x == sum[0]; });
    if (constant && params->p == 2)
        tp.warning = "constant direction over characteristic 2: the mask factor "
                     "T(pk_i)+T(pk_j) always vanishes, every session aborts";

    tp.parts = std::move(parts);
    tp.direction_sum = std::move(sum);
    tp.orbit = std::move(orbit);
    return tp;
}

inline TParams t_params_gen(std::shared_ptr<const OrbitContext> orbit, uint32_t n_parts,
                            uint32_t degree, Rng& rng, SheetMode mode = SheetMode::normalized) {
    const uint32_t r = orbit->size();
    if (r < 2) fail(errc::orbit_too_small, "need at least two orbit points");
    if (n_parts < 1) throw std::invalid_argument("need at least one part");
    const auto& params = orbit->twist.params;

    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<WPartParams> parts;
        parts.reserve(n_parts);
        for (uint32_t t = 0; t < n_parts; ++t) {
            std::vector<FieldElement> sheet, targets;
            for (uint32_t i = 0; i < pair_count(r); ++i) sheet.push_back(random_nonzero(params, rng));
            for (uint32_t i = 0; i < r; ++i) targets.push_back(random_nonzero(params, rng));
            parts.push_back(make_w_part(*orbit, std::move(sheet), std::move(targets)));
        }
        std::vector<FieldElement> sum(r, FieldElement::zero(params));
        for (const auto& part : parts)
            for (uint32_t k = 0; k < r; ++k) sum[k] = add(sum[k], part.direction[k]);
        if (std::any_of(sum.begin(), sum.end(), [](const FieldElement& x) { return x.is_zero(); }))
            continue;
        // a constant direction over char 2 would abort every session; redraw
        if (params->p == 2 && std::all_of(sum.begin(), sum.end(),
                                          [&](const FieldElement& x) { return x == sum[0]; }))
            continue;
        return make_t_params(orbit, std::move(parts), degree, mode);
    }
    fail(errc::zero_direction_unavoidable, "could not find parts with nonzero summed direction");
}

// Evaluates the factor product at every orbit point. Also usable as an
// independent recomputation of a cached value vector.
inline std::vector<FieldElement> w_value_vector(const OrbitContext& orbit, const WElement& elem) {
    const uint32_t r = orbit.size();
    const auto& params = orbit.twist.params;
    std::vector<FieldElement> values;
    values.reserve(r);
    for (uint32_t k = 0; k < r; ++k) {
        FieldElement acc = FieldElement::one(params);
        for (const auto& f : elem.factors) {
            const FieldElement& val = (k == f.i) ? f.dist_i : (k == f.j) ? f.dist_j : f.generic;
            acc = mul(acc, val);
        }
        values.push_back(acc);
    }
    return values;
}

// Exact check of the two constraint families against a profile.
inline bool w_membership_check(const OrbitContext& orbit, const WElement& elem,
                               const WProfile& profile) {
    const uint32_t r = orbit.size();
    const auto& params = orbit.twist.params;
    if (elem.factors.size() != pair_count(r)) return false;
    if (profile.u.size() != pair_count(r) || profile.v.size() != pair_count(r)) return false;

    // row products of distinguished values
    std::vector<FieldElement> row(r, FieldElement::one(params));
    for (const auto& f : elem.factors) {
        row[f.i] = mul(row[f.i], f.dist_i);
        row[f.j] = mul(row[f.j], f.dist_j);
    }

    for (uint32_t i = 0; i < r; ++i) {
        for (uint32_t l = i + 1; l < r; ++l) {
            FieldElement gu = FieldElement::one(params);
            FieldElement gv = FieldElement::one(params);
            for (uint32_t k = 0; k < r; ++k) {
                if (k == i || k == l) continue;
                gu = mul(gu, elem.factors[pair_index(std::min(l, k), std::max(l, k), r)].generic);
                gv = mul(gv, elem.factors[pair_index(std::min(i, k), std::max(i, k), r)].generic);
            }
            uint32_t idx = pair_index(i, l, r);
            if (mul(row[i], gu) != profile.u[idx]) return false;
            if (mul(row[l], gv) != profile.v[idx]) return false;
        }
    }
    return true;
}

// Samples a member of the part's W class. Generic values come from the sheet
// (privately rescaled in faithful mode); each distinguished row is free except
// for its last entry, forced so the row product hits the target.
inline WElement w_sample_from(const OrbitContext& orbit, const WPartParams& part, SheetMode mode,
                              Rng& rng) {
    const uint32_t r = orbit.size();
    if (r < 2) fail(errc::orbit_too_small, "need at least two orbit points");
    const auto& params = orbit.twist.params;

    std::vector<FieldElement> sheet = part.sheet;
    std::vector<FieldElement> targets = part.row_targets;
    if (mode == SheetMode::faithful) {
        // Private resampling inside the same W class: scaling every generic by
        // x^2 forces the row targets to scale by x^(4-2r); the derived (u, v)
        // are unchanged, the leftover generic products are not.
        FieldElement x = random_nonzero(params, rng);
        FieldElement x2 = mul(x, x);
        FieldElement tscale = pow(inv(x), 2 * uint64_t(r) - 4);
        for (auto& g : sheet) g = mul(g, x2);
        for (auto& d : targets) d = mul(d, tscale);
    }

    for (int attempt = 0; attempt < 64; ++attempt) {
        // row[i][k]: distinguished value of pair {i,k} at position i
        std::vector<std::vector<FieldElement>> row(r, std::vector<FieldElement>(r));
        bool ok = true;
        for (uint32_t i = 0; i < r && ok; ++i) {
            FieldElement prod = FieldElement::one(params);
            uint32_t last = (r - 1 == i) ? r - 2 : r - 1;
            for (uint32_t k = 0; k < r; ++k) {
                if (k == i || k == last) continue;
                row[i][k] = random_nonzero(params, rng);
                prod = mul(prod, row[i][k]);
            }
            FieldElement forced = mul(targets[i], inv(prod));
            if (forced.is_zero()) {  // cannot happen over a field; kept as a guard
                ok = false;
                break;
            }
            row[i][last] = forced;
        }
        if (!ok) continue;

        WElement elem;
        elem.profile = part.profile;
        elem.factors.reserve(pair_count(r));
        for (uint32_t i = 0; i < r; ++i)
            for (uint32_t j = i + 1; j < r; ++j)
                elem.factors.push_back(PairFactor{i, j, sheet[pair_index(i, j, r)], row[i][j], row[j][i]});
        elem.values = w_value_vector(orbit, elem);

        if (!w_membership_check(orbit, elem, part.profile))
            fail(errc::constraint_unsatisfiable, "sampled element violates its own profile");
        return elem;
    }
    fail(errc::constraint_unsatisfiable, "row sampling exhausted its retry budget");
}

inline WElement w_sample(const TParams& tp, uint32_t part, Rng& rng) {
    return w_sample_from(*tp.orbit, tp.parts.at(part), tp.mode, rng);
}

// A protocol secret: the constant factor c0 (the u = v class collapses to a
// constant on the orbit) times the sum of one element per part.
struct TElement {
    std::shared_ptr<const OrbitContext> orbit;
    FieldElement c0;
    std::vector<WElement> parts;
    std::vector<FieldElement> values;
    bool erased = false;

    void wipe() {
        c0.wipe();
        for (auto& part : parts) {
            for (auto& f : part.factors) {
                f.generic.wipe();
                f.dist_i.wipe();
                f.dist_j.wipe();
            }
            for (auto& x : part.profile.u) x.wipe();
            for (auto& x : part.profile.v) x.wipe();
            for (auto& x : part.values) x.wipe();
        }
        for (auto& x : values) x.wipe();
        erased = true;
    }
};

inline TElement t_sample_fixed(const TParams& tp, const FieldElement& c0, Rng& rng) {
    if (c0.is_zero()) throw std::invalid_argument("c0 must be nonzero");
    const auto& params = tp.orbit->twist.params;
    detail::check_same(c0, FieldElement::zero(params));

    for (int attempt = 0; attempt < 64; ++attempt) {
        TElement elem;
        elem.orbit = tp.orbit;
        elem.c0 = c0;
        for (uint32_t t = 0; t < tp.n_parts; ++t) elem.parts.push_back(w_sample(tp, t, rng));

        elem.values.reserve(tp.orbit->size());
        bool nonzero = true;
        for (uint32_t k = 0; k < tp.orbit->size(); ++k) {
            FieldElement acc = FieldElement::zero(params);
            for (const auto& part : elem.parts) acc = add(acc, part.values[k]);
            acc = mul(c0, acc);
            nonzero = nonzero && !acc.is_zero();
            elem.values.push_back(std::move(acc));
        }
        if (nonzero) return elem;  // normalized mode always lands here first try
    }
    fail(errc::zero_direction_unavoidable, "sampled secret kept evaluating to zero");
}

inline TElement t_sample(const TParams& tp, Rng& rng) {
    return t_sample_fixed(tp, random_nonzero(tp.orbit->twist.params, rng), rng);
}

inline const FieldElement& t_value_at(const TElement& elem, const FieldElement& x) {
    if (elem.erased) throw std::logic_error("secret has been erased");
    return elem.values[elem.orbit->position_of(x)];
}

// P(a_i) Q(a_l) == P(a_l) Q(a_i) for all pairs.
inline bool cross_commutation_check(const TElement& P, const TElement& Q) {
    if (!P.orbit || !Q.orbit || !(P.orbit == Q.orbit || P.orbit->same_as(*Q.orbit)))
        fail(errc::context_mismatch, "elements from different orbit contexts");
    const uint32_t r = P.orbit->size();
    for (uint32_t i = 0; i < r; ++i)
        for (uint32_t l = i + 1; l < r; ++l)
            if (mul(P.values[i], Q.values[l]) != mul(P.values[l], Q.values[i])) return false;
    return true;
}

struct IdentityExperimentReport {
    uint64_t trials = 0;
    uint64_t sum_checks = 0, sum_violations = 0;
    uint64_t product_checks = 0, product_violations = 0;
    std::string first_violation;
};

// Samples P,Q from one W class and R,S from another, then checks the sum and
// product cross-commutation identities by direct evaluation. In normalized
// mode both identities hold; in faithful mode the sum identity can fail once
// the orbit has r >= 4 (pairs avoiding {i,l} exist, so the private leftover
// generic products no longer cancel).
inline IdentityExperimentReport sum_product_identity_experiment(
    const std::shared_ptr<const OrbitContext>& orbit, SheetMode mode, uint64_t trials, Rng& rng) {
    const uint32_t r = orbit->size();
    if (r < 2) fail(errc::orbit_too_small, "need at least two orbit points");
    const auto& params = orbit->twist.params;

    auto random_part = [&] {
        std::vector<FieldElement> sheet, targets;
        for (uint32_t i = 0; i < pair_count(r); ++i) sheet.push_back(random_nonzero(params, rng));
        for (uint32_t i = 0; i < r; ++i) targets.push_back(random_nonzero(params, rng));
        return make_w_part(*orbit, std::move(sheet), std::move(targets));
    };
    WPartParams profile_a = random_part();
    WPartParams profile_b = random_part();

    IdentityExperimentReport report;
    report.trials = trials;
    for (uint64_t trial = 0; trial < trials; ++trial) {
        WElement P = w_sample_from(*orbit, profile_a, mode, rng);
        WElement Q = w_sample_from(*orbit, profile_a, mode, rng);
        WElement R = w_sample_from(*orbit, profile_b, mode, rng);
        WElement S = w_sample_from(*orbit, profile_b, mode, rng);

        for (uint32_t i = 0; i < r; ++i) {
            for (uint32_t l = i + 1; l < r; ++l) {
                FieldElement sum_lhs = mul(add(P.values[i], R.values[i]), add(Q.values[l], S.values[l]));
                FieldElement sum_rhs = mul(add(P.values[l], R.values[l]), add(Q.values[i], S.values[i]));
                ++report.sum_checks;
                if (sum_lhs != sum_rhs) {
                    ++report.sum_violations;
                    if (report.first_violation.empty())
                        report.first_violation = "sum identity, trial " + std::to_string(trial) +
                                                 ", pair (" + std::to_string(i + 1) + "," +
                                                 std::to_string(l + 1) + ")";
                }

                FieldElement prod_lhs = mul(mul(P.values[i], R.values[i]), mul(Q.values[l], S.values[l]));
                FieldElement prod_rhs = mul(mul(P.values[l], R.values[l]), mul(Q.values[i], S.values[i]));
                ++report.product_checks;
                if (prod_lhs != prod_rhs) {
                    ++report.product_violations;
                    if (report.first_violation.empty())
                        report.first_violation = "product identity, trial " + std::to_string(trial) +
                                                 ", pair (" + std::to_string(i + 1) + "," +
                                                 std::to_string(l + 1) + ")";
                }
            }
        }
    }
    return report;
}

}  // namespace skewdh
