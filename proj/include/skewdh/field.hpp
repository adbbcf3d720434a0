#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewdh/error.hpp"
#include "skewdh/rng.hpp"

namespace skewdh {

// Parameters of F_q, q = p^m: the prime, the extension degree and the monic
// irreducible modulus (coefficients mod p, ascending powers, length m+1).
struct FieldParams {
    uint32_t p = 0;
    uint32_t m = 0;
    std::vector<uint16_t> modulus;
    uint64_t order = 0;  // p^m, or 0 when it does not fit in 64 bits

    bool operator==(const FieldParams& other) const {
        return p == other.p && m == other.m && modulus == other.modulus;
    }
};

using FieldParamsPtr = std::shared_ptr<const FieldParams>;

// Elements enumerable / tabulable up to this order.
inline constexpr uint64_t kEnumerationLimit = uint64_t(1) << 20;

namespace detail {

inline bool is_prime_u32(uint32_t n) {
    if (n < 2) return false;
    for (uint32_t d = 2; uint64_t(d) * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline uint64_t mod_pow_u64(uint64_t base, uint64_t exp, uint64_t mod) {
    uint64_t acc = 1 % mod;
    base %= mod;
    while (exp) {
        if (exp & 1) acc = acc * base % mod;
        base = base * base % mod;
        exp >>= 1;
    }
    return acc;
}

inline uint32_t inv_mod_p(uint32_t a, uint32_t p) {
    return uint32_t(mod_pow_u64(a, p - 2, p));
}

// Dense polynomials over F_p, ascending powers, for modulus validation and
// element inversion. Degree of the zero polynomial is -1.
using Poly = std::vector<uint32_t>;

inline int poly_deg(const Poly& a) {
    for (int i = int(a.size()) - 1; i >= 0; --i)
        if (a[i] != 0) return i;
    return -1;
}

inline void poly_trim(Poly& a) { a.resize(size_t(poly_deg(a) + 1)); }

// a mod b over F_p; b must be nonzero.
inline Poly poly_mod(Poly a, const Poly& b, uint32_t p) {
    int db = poly_deg(b);
    uint32_t lead_inv = inv_mod_p(b[size_t(db)], p);
    for (int i = poly_deg(a); i >= db; i = poly_deg(a)) {
        uint64_t c = uint64_t(a[size_t(i)]) * lead_inv % p;
        if (c != 0) {
            for (int j = 0; j <= db; ++j) {
                uint64_t sub = c * b[size_t(j)] % p;
                size_t k = size_t(i - db + j);
                a[k] = uint32_t((a[k] + p - sub) % p);
            }
        }
        a[size_t(i)] = 0;
    }
    poly_trim(a);
    return a;
}

inline bool poly_is_zero(const Poly& a) { return poly_deg(a) < 0; }

// Exhaustive trial division by every monic divisor of degree <= m/2.
// Desk-scale by design: the library never constructs fields large enough for
// this to matter.
inline bool is_irreducible(const Poly& f, uint32_t p, uint32_t m) {
    if (m == 1) return true;
    for (uint32_t d = 1; d <= m / 2; ++d) {
        // odometer over the d low coefficients of a monic degree-d divisor
        Poly g(d + 1, 0);
        g[d] = 1;
        for (;;) {
            if (poly_is_zero(poly_mod(f, g, p))) return false;
            uint32_t k = 0;
            while (k < d) {
                if (++g[k] < p) break;
                g[k] = 0;
                ++k;
            }
            if (k == d) break;
        }
    }
    return true;
}

}  // namespace detail

// Validates and freezes field parameters.
// p must be prime (< 2^16), m in [1, 16], modulus_poly monic of degree m with
// coefficients already reduced mod p, irreducible over F_p.
inline FieldParamsPtr make_field(uint32_t p, uint32_t m, std::vector<uint16_t> modulus_poly) {
    if (p >= (uint32_t(1) << 16)) fail(errc::invalid_field, "p must be < 2^16");
    if (!detail::is_prime_u32(p)) fail(errc::not_prime, "p = " + std::to_string(p));
    if (m < 1 || m > 16) fail(errc::invalid_field, "extension degree must be in [1, 16]");
    if (modulus_poly.size() != size_t(m) + 1)
        fail(errc::invalid_field, "modulus must have m+1 coefficients");
    for (uint16_t c : modulus_poly)
        if (c >= p) fail(errc::coefficient_out_of_range, "modulus coefficient >= p");
    if (modulus_poly[m] != 1) fail(errc::not_monic, "leading coefficient must be 1");

    detail::Poly f(modulus_poly.begin(), modulus_poly.end());
    if (!detail::is_irreducible(f, p, m))
        fail(errc::reducible, "modulus factors over F_p");

    auto params = std::make_shared<FieldParams>();
    params->p = p;
    params->m = m;
    params->modulus = std::move(modulus_poly);
    uint64_t order = 1;
    for (uint32_t i = 0; i < m; ++i) {
        if (order > UINT64_MAX / p) {
            order = 0;
            break;
        }
        order *= p;
    }
    params->order = order;
    return params;
}

// An element of F_q: exactly m residues in [0, p), ascending powers of the
// adjoined root. Immutable value type; all arithmetic is by free functions.
class FieldElement {
public:
    FieldElement() = default;

    static FieldElement zero(FieldParamsPtr params) {
        return FieldElement(std::move(params));
    }

    static FieldElement one(FieldParamsPtr params) {
        FieldElement e = zero(std::move(params));
        e.coeffs_[0] = 1;
        return e;
    }

    static FieldElement from_coeffs(FieldParamsPtr params, std::vector<uint16_t> coeffs) {
        if (coeffs.size() != params->m) fail(errc::bad_length, "expected m coefficients");
        for (uint16_t c : coeffs)
            if (c >= params->p) fail(errc::coefficient_out_of_range, "coefficient >= p");
        FieldElement e;
        e.params_ = std::move(params);
        e.coeffs_ = std::move(coeffs);
        return e;
    }

    // Inverse of the canonical integer encoding val(x) = sum coeffs[i] * p^i.
    static FieldElement from_index(FieldParamsPtr params, uint64_t index) {
        if (params->order == 0 || index >= params->order)
            fail(errc::too_large, "index outside field order");
        FieldElement e = zero(params);
        for (uint32_t i = 0; i < params->m; ++i) {
            e.coeffs_[i] = uint16_t(index % params->p);
            index /= params->p;
        }
        return e;
    }

    const FieldParamsPtr& field() const { return params_; }
    const std::vector<uint16_t>& coeffs() const { return coeffs_; }

    bool is_zero() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](uint16_t c) { return c == 0; });
    }

    uint64_t index() const {
        if (params_->order == 0) fail(errc::too_large, "field order exceeds 64 bits");
        uint64_t v = 0;
        for (uint32_t i = params_->m; i-- > 0;) v = v * params_->p + coeffs_[i];
        return v;
    }

    // Zeroizes the backing storage (secret erasure support).
    void wipe() { std::fill(coeffs_.begin(), coeffs_.end(), uint16_t(0)); }

    friend bool operator==(const FieldElement& a, const FieldElement& b) {
        return a.coeffs_ == b.coeffs_ && (a.params_ == b.params_ || *a.params_ == *b.params_);
    }
    friend bool operator!=(const FieldElement& a, const FieldElement& b) { return !(a == b); }

private:
    explicit FieldElement(FieldParamsPtr params)
        : params_(std::move(params)), coeffs_(params_->m, 0) {}

    FieldParamsPtr params_;
    std::vector<uint16_t> coeffs_;
};

namespace detail {

inline void check_same(const FieldElement& a, const FieldElement& b) {
    if (a.field() == b.field()) return;
    if (*a.field() == *b.field()) return;
    fail(errc::params_mismatch, "elements from different fields");
}

}  // namespace detail

// Canonical ordering: by val(x), computed without forming the integer so it
// also works for fields whose order exceeds 64 bits.
inline bool index_less(const FieldElement& a, const FieldElement& b) {
    detail::check_same(a, b);
    const auto& ca = a.coeffs();
    const auto& cb = b.coeffs();
    for (size_t i = ca.size(); i-- > 0;)
        if (ca[i] != cb[i]) return ca[i] < cb[i];
    return false;
}

inline FieldElement add(const FieldElement& x, const FieldElement& y) {
    detail::check_same(x, y);
    const auto& params = x.field();
    std::vector<uint16_t> out(params->m);
    for (uint32_t i = 0; i < params->m; ++i)
        out[i] = uint16_t((uint32_t(x.coeffs()[i]) + y.coeffs()[i]) % params->p);
    return FieldElement::from_coeffs(params, std::move(out));
}

inline FieldElement neg(const FieldElement& x) {
    const auto& params = x.field();
    std::vector<uint16_t> out(params->m);
    for (uint32_t i = 0; i < params->m; ++i)
        out[i] = uint16_t((params->p - x.coeffs()[i]) % params->p);
    return FieldElement::from_coeffs(params, std::move(out));
}

inline FieldElement sub(const FieldElement& x, const FieldElement& y) {
    detail::check_same(x, y);
    const auto& params = x.field();
    std::vector<uint16_t> out(params->m);
    for (uint32_t i = 0; i < params->m; ++i)
        out[i] = uint16_t((uint32_t(x.coeffs()[i]) + params->p - y.coeffs()[i]) % params->p);
    return FieldElement::from_coeffs(params, std::move(out));
}

inline FieldElement mul(const FieldElement& x, const FieldElement& y) {
    detail::check_same(x, y);
    const auto& params = x.field();
    const uint32_t m = params->m;
    const uint64_t p = params->p;

    // schoolbook product; partial sums stay < 16 * 2^32, no overflow
    std::vector<uint64_t> tmp(2 * m - 1, 0);
    for (uint32_t i = 0; i < m; ++i) {
        if (x.coeffs()[i] == 0) continue;
        for (uint32_t j = 0; j < m; ++j)
            tmp[i + j] += uint64_t(x.coeffs()[i]) * y.coeffs()[j];
    }
    for (auto& v : tmp) v %= p;

    // reduce using t^m = -sum_j modulus[j] t^j
    for (uint32_t i = 2 * m - 2; i >= m; --i) {
        uint64_t c = tmp[i];
        if (c != 0) {
            tmp[i] = 0;
            for (uint32_t j = 0; j < m; ++j)
                tmp[i - m + j] = (tmp[i - m + j] + c * (p - params->modulus[j])) % p;
        }
    }

    std::vector<uint16_t> out(m);
    for (uint32_t i = 0; i < m; ++i) out[i] = uint16_t(tmp[i]);
    return FieldElement::from_coeffs(params, std::move(out));
}

// Multiplicative inverse via extended Euclid on F_p[t]; x must be nonzero.
inline FieldElement inv(const FieldElement& x) {
    if (x.is_zero()) fail(errc::zero_inverse, "inverse of zero");
    const auto& params = x.field();
    const uint32_t p = params->p;

    detail::Poly r0(params->modulus.begin(), params->modulus.end());
    detail::Poly r1(x.coeffs().begin(), x.coeffs().end());
    detail::poly_trim(r1);
    detail::Poly s0{}, s1{1};

    while (!detail::poly_is_zero(r1)) {
        // one division step: r0 = q*r1 + r, s updated to keep s*x == r (mod modulus)
        int d1 = detail::poly_deg(r1);
        uint32_t lead_inv = detail::inv_mod_p(r1[size_t(d1)], p);
        detail::Poly q(size_t(std::max(detail::poly_deg(r0) - d1 + 1, 1)), 0);
        detail::Poly rem = r0;
        for (int i = detail::poly_deg(rem); i >= d1; i = detail::poly_deg(rem)) {
            uint64_t c = uint64_t(rem[size_t(i)]) * lead_inv % p;
            q[size_t(i - d1)] = uint32_t(c);
            for (int j = 0; j <= d1; ++j) {
                uint64_t sb = c * r1[size_t(j)] % p;
                size_t k = size_t(i - d1 + j);
                rem[k] = uint32_t((rem[k] + p - sb) % p);
            }
        }
        detail::poly_trim(rem);

        detail::Poly s_next = s0;  // s0 - q*s1
        s_next.resize(std::max(s_next.size(), q.size() + s1.size()), 0);
        for (size_t i = 0; i < q.size(); ++i) {
            if (q[i] == 0) continue;
            for (size_t j = 0; j < s1.size(); ++j) {
                uint64_t sb = uint64_t(q[i]) * s1[j] % p;
                s_next[i + j] = uint32_t((s_next[i + j] + p - sb) % p);
            }
        }
        detail::poly_trim(s_next);

        r0 = std::move(r1);
        r1 = std::move(rem);
        s0 = std::move(s1);
        s1 = std::move(s_next);
    }

    // r0 is a nonzero constant (modulus irreducible, x != 0)
    uint32_t scale = detail::inv_mod_p(r0[0], p);
    detail::Poly s = detail::poly_mod(std::move(s0), detail::Poly(params->modulus.begin(), params->modulus.end()), p);
    std::vector<uint16_t> out(params->m, 0);
    for (size_t i = 0; i < s.size(); ++i)
        out[i] = uint16_t(uint64_t(s[i]) * scale % p);
    return FieldElement::from_coeffs(params, std::move(out));
}

inline FieldElement pow(const FieldElement& x, uint64_t e) {
    FieldElement acc = FieldElement::one(x.field());
    FieldElement base = x;
    while (e) {
        if (e & 1) acc = mul(acc, base);
        base = mul(base, base);
        e >>= 1;
    }
    return acc;
}

// x -> x^(p^s), 0 <= s < m. Computed as s successive p-th powers so the
// exponent never has to be materialized.
inline FieldElement frobenius(const FieldElement& x, uint32_t s) {
    if (s >= x.field()->m)
        throw std::invalid_argument("frobenius exponent must satisfy 0 <= s < m");
    FieldElement out = x;
    for (uint32_t i = 0; i < s; ++i) out = pow(out, x.field()->p);
    return out;
}

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) { return add(a, b); }
inline FieldElement operator-(const FieldElement& a, const FieldElement& b) { return sub(a, b); }
inline FieldElement operator-(const FieldElement& a) { return neg(a); }
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) { return mul(a, b); }

// Sum_{k=0..d} x^k, the power-sum factor used by the key schedule.
inline FieldElement power_sum(const FieldElement& x, uint32_t d) {
    FieldElement acc = FieldElement::one(x.field());
    FieldElement xe = FieldElement::one(x.field());
    for (uint32_t k = 1; k <= d; ++k) {
        xe = mul(xe, x);
        acc = add(acc, xe);
    }
    return acc;
}

// All q elements, ascending by canonical integer encoding. Guarded desk-scale.
inline std::vector<FieldElement> enumerate_field(const FieldParamsPtr& params) {
    if (params->order == 0 || params->order > kEnumerationLimit)
        fail(errc::too_large, "field too large to enumerate");
    std::vector<FieldElement> out;
    out.reserve(size_t(params->order));
    for (uint64_t i = 0; i < params->order; ++i)
        out.push_back(FieldElement::from_index(params, i));
    return out;
}

// Wire encoding: each coefficient as 2-byte little-endian, ascending powers.
inline std::vector<uint8_t> encode(const FieldElement& x) {
    std::vector<uint8_t> out;
    out.reserve(2 * x.coeffs().size());
    for (uint16_t c : x.coeffs()) {
        out.push_back(uint8_t(c & 0xff));
        out.push_back(uint8_t(c >> 8));
    }
    return out;
}

inline FieldElement decode(const FieldParamsPtr& params, std::span<const uint8_t> bytes) {
    if (bytes.size() != size_t(2) * params->m)
        fail(errc::bad_length, "expected exactly 2m bytes");
    std::vector<uint16_t> coeffs(params->m);
    for (uint32_t i = 0; i < params->m; ++i) {
        uint16_t c = uint16_t(bytes[2 * i] | (uint16_t(bytes[2 * i + 1]) << 8));
        if (c >= params->p) fail(errc::coefficient_out_of_range, "coefficient >= p");
        coeffs[i] = c;
    }
    return FieldElement::from_coeffs(params, std::move(coeffs));
}

inline FieldElement random_element(const FieldParamsPtr& params, Rng& rng) {
    std::vector<uint16_t> coeffs(params->m);
    for (auto& c : coeffs) c = uint16_t(rng.below(params->p));
    return FieldElement::from_coeffs(params, std::move(coeffs));
}

inline FieldElement random_nonzero(const FieldParamsPtr& params, Rng& rng) {
    for (;;) {
        FieldElement e = random_element(params, rng);
        if (!e.is_zero()) return e;
    }
}

// Lowest monic irreducible of degree m over F_p, by canonical-encoding order.
// Deterministic, so generated parameter files are reproducible.
inline std::vector<uint16_t> find_irreducible(uint32_t p, uint32_t m) {
    if (!detail::is_prime_u32(p)) fail(errc::not_prime, "p = " + std::to_string(p));
    if (m < 1 || m > 16) fail(errc::invalid_field, "extension degree must be in [1, 16]");
    detail::Poly f(m + 1, 0);
    f[m] = 1;
    for (;;) {
        if (detail::is_irreducible(f, p, m)) {
            std::vector<uint16_t> out(m + 1);
            for (size_t i = 0; i <= m; ++i) out[i] = uint16_t(f[i]);
            return out;
        }
        uint32_t k = 0;
        while (k < m) {
            if (++f[k] < p) break;
            f[k] = 0;
            ++k;
        }
        if (k == m) fail(errc::invalid_field, "no irreducible found");  // unreachable
    }
}

}  // namespace skewdh
