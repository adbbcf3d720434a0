#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "skewdh/digest.hpp"
#include "skewdh/games.hpp"
#include "skewdh/protocol.hpp"

namespace skewdh {

inline nlohmann::json element_to_json(const FieldElement& x) {
    nlohmann::json arr = nlohmann::json::array();
    for (uint16_t c : x.coeffs()) arr.push_back(c);
    return arr;
}

inline FieldElement element_from_json(const FieldParamsPtr& params, const nlohmann::json& j) {
    if (!j.is_array()) fail(errc::bad_param_file, "field element must be a coefficient array");
    std::vector<uint16_t> coeffs;
    for (const auto& c : j) {
        if (!c.is_number_unsigned() || c.get<uint64_t>() >= params->p)
            fail(errc::bad_param_file, "coefficient out of range");
        coeffs.push_back(uint16_t(c.get<uint64_t>()));
    }
    if (coeffs.size() != params->m) fail(errc::bad_param_file, "wrong coefficient count");
    return FieldElement::from_coeffs(params, std::move(coeffs));
}

// The parameter file: every field element as an ascending coefficient array.
// Serialization is canonical (sorted keys, no whitespace) so its SHA-256
// digest identifies the parameter set.
inline nlohmann::json params_to_json(const DomainParams& dp) {
    nlohmann::json j;
    j["p"] = dp.field->p;
    j["m"] = dp.field->m;
    j["modulus"] = dp.field->modulus;
    j["s"] = dp.twist.frobenius_exp;
    j["beta"] = element_to_json(dp.twist.beta);
    j["a"] = element_to_json(dp.base);
    j["d"] = dp.degree;
    j["n_parts"] = dp.tparams.n_parts;
    j["mode"] = dp.tparams.mode == SheetMode::normalized ? "normalized" : "faithful";
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& part : dp.tparams.parts) {
        nlohmann::json pj;
        nlohmann::json sheet = nlohmann::json::array();
        for (const auto& x : part.sheet) sheet.push_back(element_to_json(x));
        nlohmann::json targets = nlohmann::json::array();
        for (const auto& x : part.row_targets) targets.push_back(element_to_json(x));
        pj["sheet"] = std::move(sheet);
        pj["row_targets"] = std::move(targets);
        parts.push_back(std::move(pj));
    }
    j["parts"] = std::move(parts);
    return j;
}

inline DomainParams params_from_json(const nlohmann::json& j) {
    try {
        FieldParamsPtr field = make_field(j.at("p").get<uint32_t>(), j.at("m").get<uint32_t>(),
                                          j.at("modulus").get<std::vector<uint16_t>>());
        Twist tw = make_twist(field, j.at("s").get<uint32_t>(),
                              element_from_json(field, j.at("beta")));
        FieldElement base = element_from_json(field, j.at("a"));
        auto orbit = std::make_shared<const OrbitContext>(conjugacy_class(tw, base));

        std::string mode_str = j.at("mode").get<std::string>();
        if (mode_str != "normalized" && mode_str != "faithful")
            fail(errc::bad_param_file, "unknown mode");
        SheetMode mode = mode_str == "normalized" ? SheetMode::normalized : SheetMode::faithful;

        std::vector<WPartParams> parts;
        for (const auto& pj : j.at("parts")) {
            std::vector<FieldElement> sheet, targets;
            for (const auto& x : pj.at("sheet")) sheet.push_back(element_from_json(field, x));
            for (const auto& x : pj.at("row_targets"))
                targets.push_back(element_from_json(field, x));
            parts.push_back(make_w_part(*orbit, std::move(sheet), std::move(targets)));
        }
        if (parts.size() != j.at("n_parts").get<size_t>())
            fail(errc::bad_param_file, "n_parts does not match parts");
        return make_domain_params(
            make_t_params(std::move(orbit), std::move(parts), j.at("d").get<uint32_t>(), mode));
    } catch (const nlohmann::json::exception& e) {
        fail(errc::bad_param_file, e.what());
    }
}

inline std::string params_canonical_text(const DomainParams& dp) {
    return params_to_json(dp).dump();
}

inline std::array<uint8_t, 32> params_digest(const DomainParams& dp) {
    std::string text = params_canonical_text(dp);
    return sha256(std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

inline std::string params_digest_hex(const DomainParams& dp) {
    auto d = params_digest(dp);
    return hex(d);
}

// ---- parameter generation ------------------------------------------------------

struct GenOptions {
    uint32_t p = 2, m = 2, s = 1;
    uint64_t beta_index = 0;
    uint32_t n_parts = 1;
    uint32_t degree = 1;
    uint32_t r_min = 3, r_max = 64;
    uint64_t seed = 0;
    SheetMode mode = SheetMode::normalized;
};

// Searches base points in canonical order for an orbit of acceptable size.
// Orbits containing zero are skipped: an honest public key drawn from such an
// orbit could be the zero element, which receivers reject.
inline DomainParams gen_params(const GenOptions& opt) {
    FieldParamsPtr field = make_field(opt.p, opt.m, find_irreducible(opt.p, opt.m));
    if (opt.s >= opt.m) fail(errc::invalid_field, "need s < m");
    if (opt.beta_index >= field->order) fail(errc::invalid_field, "beta index out of range");
    if (field->order > kEnumerationLimit) fail(errc::too_large, "field too large for orbit search");
    Twist tw = make_twist(field, opt.s, FieldElement::from_index(field, opt.beta_index));
    if (opt.n_parts < 1) fail(errc::invalid_field, "need at least one part");

    Rng rng(opt.seed);
    uint32_t r_min = std::max(opt.r_min, 2u);
    for (const auto& a : enumerate_field(field)) {
        auto orbit = std::make_shared<const OrbitContext>(conjugacy_class(tw, a));
        if (orbit->size() < r_min || orbit->size() > opt.r_max) continue;
        if (orbit->contains(FieldElement::zero(field))) continue;
        try {
            return make_domain_params(
                t_params_gen(std::move(orbit), opt.n_parts, opt.degree, rng, opt.mode));
        } catch (const error&) {
            continue;
        }
    }
    fail(errc::no_suitable_orbit, "no base point with orbit size in [" + std::to_string(r_min) +
                                      ", " + std::to_string(opt.r_max) + "]");
}

// ---- secret serialization (pke key files) ---------------------------------------

inline nlohmann::json telement_to_json(const TElement& elem) {
    nlohmann::json j;
    j["c0"] = element_to_json(elem.c0);
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& part : elem.parts) {
        nlohmann::json factors = nlohmann::json::array();
        for (const auto& f : part.factors) {
            nlohmann::json fj;
            fj["generic"] = element_to_json(f.generic);
            fj["dist_i"] = element_to_json(f.dist_i);
            fj["dist_j"] = element_to_json(f.dist_j);
            factors.push_back(std::move(fj));
        }
        parts.push_back(nlohmann::json{{"factors", std::move(factors)}});
    }
    j["parts"] = std::move(parts);
    return j;
}

inline TElement telement_from_json(const TParams& tp, const nlohmann::json& j) {
    try {
        const auto& params = tp.orbit->twist.params;
        const uint32_t r = tp.orbit->size();
        TElement elem;
        elem.orbit = tp.orbit;
        elem.c0 = element_from_json(params, j.at("c0"));
        if (elem.c0.is_zero()) fail(errc::bad_param_file, "zero constant factor");
        if (j.at("parts").size() != tp.n_parts) fail(errc::bad_param_file, "part count mismatch");

        uint32_t t = 0;
        for (const auto& pj : j.at("parts")) {
            WElement w;
            w.profile = tp.parts[t].profile;
            const auto& factors = pj.at("factors");
            if (factors.size() != pair_count(r)) fail(errc::bad_param_file, "factor count mismatch");
            uint32_t idx = 0;
            for (uint32_t i = 0; i < r; ++i) {
                for (uint32_t l = i + 1; l < r; ++l, ++idx) {
                    const auto& fj = factors.at(idx);
                    w.factors.push_back(PairFactor{i, l, element_from_json(params, fj.at("generic")),
                                                   element_from_json(params, fj.at("dist_i")),
                                                   element_from_json(params, fj.at("dist_j"))});
                }
            }
            w.values = w_value_vector(*tp.orbit, w);
            if (!w_membership_check(*tp.orbit, w, tp.parts[t].profile))
                fail(errc::bad_param_file, "stored secret violates its class constraints");
            elem.parts.push_back(std::move(w));
            ++t;
        }

        for (uint32_t k = 0; k < r; ++k) {
            FieldElement acc = FieldElement::zero(params);
            for (const auto& part : elem.parts) acc = add(acc, part.values[k]);
            acc = mul(elem.c0, acc);
            if (acc.is_zero()) fail(errc::bad_param_file, "secret evaluates to zero on the orbit");
            elem.values.push_back(std::move(acc));
        }
        return elem;
    } catch (const nlohmann::json::exception& e) {
        fail(errc::bad_param_file, e.what());
    }
}

// ---- report serialization --------------------------------------------------------

inline nlohmann::json report_to_json(const AdvantageReport& rep, const std::string& digest_hex) {
    nlohmann::json j;
    j["game"] = rep.game;
    j["trials"] = rep.trials;
    if (rep.game == "dgsap") {
        j["w0"] = rep.w0;
        j["w1"] = rep.w1;
    } else {
        j["wins"] = rep.wins;
    }
    j["estimate"] = rep.estimate;
    j["ci_lo"] = rep.ci.lo;
    j["ci_hi"] = rep.ci.hi;
    j["seed"] = rep.seed;
    j["params_digest"] = digest_hex;
    return j;
}

}  // namespace skewdh
